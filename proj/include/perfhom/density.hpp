#ifndef PERFHOM_DENSITY_HPP
#define PERFHOM_DENSITY_HPP

#include <Eigen/Dense>
#include <memory>
#include <stdexcept>

#include "perfhom/curve.hpp"
#include "perfhom/quadrature.hpp"

namespace perfhom {

// Vector density on a panelization; values stacked node-major as
// [u^1(x_0), u^2(x_0), u^1(x_1), ...].
struct DensityField {
    std::shared_ptr<const Panelization> pan;
    Eigen::VectorXd values;

    DensityField() = default;
    explicit DensityField(std::shared_ptr<const Panelization> p)
        : pan(std::move(p)), values(Eigen::VectorXd::Zero(2 * pan->n_nodes)) {}
    DensityField(std::shared_ptr<const Panelization> p, Eigen::VectorXd v)
        : pan(std::move(p)), values(std::move(v)) {
        if (values.size() != 2 * pan->n_nodes)
            throw std::invalid_argument("DensityField: value size mismatch");
    }

    int n() const { return pan->n_nodes; }
    Eigen::Vector2d at(int i) const { return {values[2 * i], values[2 * i + 1]}; }
    void set(int i, const Eigen::Vector2d& v) {
        values[2 * i] = v.x();
        values[2 * i + 1] = v.y();
    }

    // componentwise boundary integral int_{dT} phi
    Eigen::Vector2d boundary_integral() const {
        Eigen::Vector2d acc = Eigen::Vector2d::Zero();
        for (int i = 0; i < n(); ++i) acc += pan->w * pan->speed[i] * at(i);
        return acc;
    }
    Eigen::Vector2d mean() const { return boundary_integral() / pan->length(); }

    DensityField fluctuation() const {
        DensityField out(pan);
        Eigen::Vector2d m = mean();
        for (int i = 0; i < n(); ++i) out.set(i, at(i) - m);
        return out;
    }
};

// weighted L^2(dT) inner product of node data
inline double inner(const DensityField& u, const DensityField& v) {
    double acc = 0.0;
    for (int i = 0; i < u.n(); ++i) acc += u.pan->w * u.pan->speed[i] * u.at(i).dot(v.at(i));
    return acc;
}

inline double l2_norm(const DensityField& u) { return std::sqrt(inner(u, u)); }

inline DensityField constant_density(std::shared_ptr<const Panelization> pan,
                                     const Eigen::Vector2d& c) {
    DensityField out(std::move(pan));
    for (int i = 0; i < out.n(); ++i) out.set(i, c);
    return out;
}

}  // namespace perfhom

#endif
