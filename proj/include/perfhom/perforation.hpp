#ifndef PERFHOM_PERFORATION_HPP
#define PERFHOM_PERFORATION_HPP

#include <stdexcept>
#include <vector>

#include "perfhom/curve.hpp"

namespace perfhom {

// Lattice of holes eps*(z + eta*T) inside the unit square D = (0,1)^2.
// Holes whose closure is not strictly interior to D are dropped.
struct PerforationSpec {
    double epsilon = 0.0;
    double eta = 0.0;
    std::shared_ptr<const Curve> curve;
    std::vector<Vec2> centers;  // eps * z, z integer pairs

    bool in_hole(const Vec2& p) const {
        double rad = epsilon * eta * curve->r2;
        for (const auto& c : centers) {
            Vec2 d = p - c;
            if (d.squaredNorm() > rad * rad) continue;
            if (curve->contains(d / (epsilon * eta))) return true;
        }
        return false;
    }
};

inline PerforationSpec build_perforation(double epsilon, double eta, const Curve& curve) {
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw std::invalid_argument("build_perforation: epsilon must lie in (0,1)");
    if (!(eta > 0.0) || eta * curve.r2 >= 0.5)
        throw std::invalid_argument("build_perforation: hole exits unit cell (eta r2 >= 1/2)");
    PerforationSpec spec;
    spec.epsilon = epsilon;
    spec.eta = eta;
    spec.curve = std::make_shared<Curve>(curve);
    double rad = epsilon * eta * curve.r2;
    int zmax = int(std::ceil(1.0 / epsilon)) + 1;
    for (int zx = 0; zx <= zmax; ++zx)
        for (int zy = 0; zy <= zmax; ++zy) {
            Vec2 c(epsilon * zx, epsilon * zy);
            if (c.x() - rad > 0.0 && c.x() + rad < 1.0 && c.y() - rad > 0.0 && c.y() + rad < 1.0)
                spec.centers.push_back(c);
        }
    return spec;
}

}  // namespace perfhom

#endif
