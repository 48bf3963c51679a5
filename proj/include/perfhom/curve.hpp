#ifndef PERFHOM_CURVE_HPP
#define PERFHOM_CURVE_HPP

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace perfhom {

using Vec2 = Eigen::Vector2d;

enum class CurveKind { circle, ellipse, kite };

// Smooth closed hole boundary, parametrized counterclockwise over [0, 2pi).
// Satisfies (A3): closed ball of radius r1 about 0 inside, contained in the
// ball of radius r2, with r2 < 1/2 enforced at construction.
class Curve {
public:
    CurveKind kind;
    std::vector<double> shape;  // circle: {r}; ellipse: {a,b}; kite: fixed
    double r1 = 0.0;            // inradius about the origin
    double r2 = 0.0;            // circumradius about the origin
    double area = 0.0;          // |T|, by the shoelace integral

    Vec2 point(double t) const {
        switch (kind) {
            case CurveKind::circle: return {shape[0] * std::cos(t), shape[0] * std::sin(t)};
            case CurveKind::ellipse: return {shape[0] * std::cos(t), shape[1] * std::sin(t)};
            case CurveKind::kite:
                return {0.6 * (0.25 * std::cos(t) + 0.1625 * std::cos(2 * t) - 0.1625),
                        0.6 * 0.375 * std::sin(t)};
        }
        return {};
    }
    Vec2 derivative(double t) const {
        switch (kind) {
            case CurveKind::circle: return {-shape[0] * std::sin(t), shape[0] * std::cos(t)};
            case CurveKind::ellipse: return {-shape[0] * std::sin(t), shape[1] * std::cos(t)};
            case CurveKind::kite:
                return {0.6 * (-0.25 * std::sin(t) - 0.325 * std::sin(2 * t)),
                        0.6 * 0.375 * std::cos(t)};
        }
        return {};
    }
    Vec2 second_derivative(double t) const {
        switch (kind) {
            case CurveKind::circle: return {-shape[0] * std::cos(t), -shape[0] * std::sin(t)};
            case CurveKind::ellipse: return {-shape[0] * std::cos(t), -shape[1] * std::sin(t)};
            case CurveKind::kite:
                return {0.6 * (-0.25 * std::cos(t) - 0.65 * std::cos(2 * t)),
                        -0.6 * 0.375 * std::sin(t)};
        }
        return {};
    }
    // Outward unit normal (CCW parametrization: N = (x2', -x1')/|x'|).
    Vec2 normal(double t) const {
        Vec2 d = derivative(t);
        double s = d.norm();
        return {d.y() / s, -d.x() / s};
    }

    bool contains(const Vec2& p) const {
        double r = p.norm();
        if (r < r1) return true;
        if (r > r2) return false;
        // even-odd ray crossing on a cached dense polyline
        int crossings = 0;
        const auto& poly = polyline();
        size_t n = poly.size();
        for (size_t i = 0; i < n; ++i) {
            const Vec2& a = poly[i];
            const Vec2& b = poly[(i + 1) % n];
            if ((a.y() > p.y()) != (b.y() > p.y())) {
                double xint = a.x() + (p.y() - a.y()) / (b.y() - a.y()) * (b.x() - a.x());
                if (xint > p.x()) ++crossings;
            }
        }
        return (crossings % 2) == 1;
    }

    const std::vector<Vec2>& polyline() const {
        if (poly_.empty()) {
            poly_.resize(1024);
            for (size_t i = 0; i < poly_.size(); ++i)
                poly_[i] = point(2.0 * M_PI * double(i) / double(poly_.size()));
        }
        return poly_;
    }

private:
    mutable std::vector<Vec2> poly_;
};

namespace detail {

inline void validate_simple(const Curve& c) {
    // segment-segment intersection test on a dense polyline
    const int n = 512;
    std::vector<Vec2> p(n);
    for (int i = 0; i < n; ++i) p[i] = c.point(2.0 * M_PI * i / n);
    auto cross = [](const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); };
    for (int i = 0; i < n; ++i) {
        Vec2 a = p[i], b = p[(i + 1) % n];
        for (int j = i + 2; j < n; ++j) {
            if (i == 0 && j == n - 1) continue;  // adjacent around the seam
            Vec2 cpt = p[j], d = p[(j + 1) % n];
            double d1 = cross(b - a, cpt - a), d2 = cross(b - a, d - a);
            double d3 = cross(d - cpt, a - cpt), d4 = cross(d - cpt, b - cpt);
            if (((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)))
                throw std::invalid_argument("make_curve: self-intersecting parameters");
        }
    }
}

inline double extremal_radius(const Curve& c, bool maximize) {
    // dense scan plus golden-section refinement of |x(t)|
    const int n = 4096;
    double best_t = 0.0, best = maximize ? -1.0 : 1e300;
    for (int i = 0; i < n; ++i) {
        double t = 2.0 * M_PI * i / n;
        double r = c.point(t).norm();
        if (maximize ? (r > best) : (r < best)) { best = r; best_t = t; }
    }
    double a = best_t - 2.0 * M_PI / n, b = best_t + 2.0 * M_PI / n;
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    for (int it = 0; it < 80; ++it) {
        double f1 = c.point(x1).norm(), f2 = c.point(x2).norm();
        bool keep_left = maximize ? (f1 > f2) : (f1 < f2);
        if (keep_left) { b = x2; x2 = x1; x1 = b - gr * (b - a); }
        else { a = x1; x1 = x2; x2 = a + gr * (b - a); }
    }
    return c.point(0.5 * (a + b)).norm();
}

inline double curve_area(const Curve& c) {
    // shoelace: |T| = (1/2) oint (x1 x2' - x2 x1') dt, trapezoid is spectral here
    const int n = 2048;
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        double t = 2.0 * M_PI * i / n;
        Vec2 x = c.point(t), d = c.derivative(t);
        s += x.x() * d.y() - x.y() * d.x();
    }
    return 0.5 * s * (2.0 * M_PI / n);
}

}  // namespace detail

// enforce_a3 = false skips the r2 < 1/2 containment check; free-space studies
// of scaled copies need curves that would not fit a unit periodicity cell.
inline Curve make_curve(CurveKind kind, const std::vector<double>& shape = {},
                        bool enforce_a3 = true) {
    Curve c;
    c.kind = kind;
    switch (kind) {
        case CurveKind::circle:
            if (shape.size() != 1 || shape[0] <= 0.0)
                throw std::invalid_argument("make_curve: circle needs one positive radius");
            c.shape = shape;
            c.r1 = c.r2 = shape[0];
            break;
        case CurveKind::ellipse:
            if (shape.size() != 2 || shape[0] <= 0.0 || shape[1] <= 0.0)
                throw std::invalid_argument("make_curve: ellipse needs two positive semi-axes");
            c.shape = shape;
            c.r1 = std::min(shape[0], shape[1]);
            c.r2 = std::max(shape[0], shape[1]);
            break;
        case CurveKind::kite:
            c.shape = {};
            c.r1 = detail::extremal_radius(c, false);
            c.r2 = detail::extremal_radius(c, true);
            detail::validate_simple(c);
            break;
    }
    if (enforce_a3 && !(c.r2 < 0.5))
        throw std::invalid_argument("make_curve: r2 >= 1/2 violates (A3)");
    if (!(c.r1 > 0.0))
        throw std::invalid_argument("make_curve: origin not strictly inside the hole");
    c.area = detail::curve_area(c);
    return c;
}

// Config syntax: "circle:0.25", "ellipse:0.3,0.2", "kite:default".
inline Curve parse_curve(const std::string& spec) {
    auto colon = spec.find(':');
    std::string name = spec.substr(0, colon);
    std::string args = (colon == std::string::npos) ? "" : spec.substr(colon + 1);
    if (name == "circle") return make_curve(CurveKind::circle, {std::stod(args)});
    if (name == "ellipse") {
        auto comma = args.find(',');
        if (comma == std::string::npos)
            throw std::invalid_argument("parse_curve: ellipse needs two semi-axes");
        return make_curve(CurveKind::ellipse,
                          {std::stod(args.substr(0, comma)), std::stod(args.substr(comma + 1))});
    }
    if (name == "kite") return make_curve(CurveKind::kite);
    throw std::invalid_argument("parse_curve: unknown hole spec '" + spec + "'");
}

inline std::string curve_spec_string(const Curve& c) {
    switch (c.kind) {
        case CurveKind::circle: return "circle:" + std::to_string(c.shape[0]);
        case CurveKind::ellipse:
            return "ellipse:" + std::to_string(c.shape[0]) + "," + std::to_string(c.shape[1]);
        case CurveKind::kite: return "kite:default";
    }
    return "";
}

// Nystrom node set on a curve: equispaced in parameter, trapezoid weights.
struct Panelization {
    std::shared_ptr<const Curve> curve;
    int n_nodes = 0;
    std::vector<double> theta;
    std::vector<Vec2> x;        // node positions
    std::vector<Vec2> nx;       // outward unit normals
    std::vector<Vec2> xpp;      // second derivatives (for diagonal limits)
    std::vector<double> speed;  // |x'(theta_i)|
    double w = 0.0;             // trapezoid weight 2*pi/n

    double length() const {
        double s = 0.0;
        for (int i = 0; i < n_nodes; ++i) s += speed[i];
        return s * w;
    }
    // gamma_i = <N, x''>/(2|x'|^2), the diagonal limit of <N_y, x-y>/|x-y|^2
    double gamma(int i) const { return nx[i].dot(xpp[i]) / (2.0 * speed[i] * speed[i]); }
};

inline Panelization panelize(const Curve& curve, int n_nodes) {
    if (n_nodes < 32 || n_nodes % 2 != 0)
        throw std::invalid_argument("panelize: n_nodes must be even and >= 32");
    Panelization p;
    p.curve = std::make_shared<Curve>(curve);
    p.n_nodes = n_nodes;
    p.w = 2.0 * M_PI / n_nodes;
    p.theta.resize(n_nodes);
    p.x.resize(n_nodes);
    p.nx.resize(n_nodes);
    p.xpp.resize(n_nodes);
    p.speed.resize(n_nodes);
    for (int i = 0; i < n_nodes; ++i) {
        double t = p.w * i;
        p.theta[i] = t;
        p.x[i] = curve.point(t);
        p.nx[i] = curve.normal(t);
        p.xpp[i] = curve.second_derivative(t);
        p.speed[i] = curve.derivative(t).norm();
    }
    return p;
}

}  // namespace perfhom

#endif
