#ifndef PERFHOM_FD_SOLVER_HPP
#define PERFHOM_FD_SOLVER_HPP

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>

#include "perfhom/cell.hpp"
#include "perfhom/grid.hpp"

namespace perfhom {

using FieldFn = std::function<Eigen::Vector2d(const Eigen::Vector2d&)>;

struct FdReport {
    int iterations = 0;
    double rel_residual = 0.0;
    double energy = 0.0;      // mu |grad u|^2 + (lam+mu)(div u)^2, discrete
    double rhs_work = 0.0;    // int f . u, discrete
    double energy_residual = 0.0;  // relative defect of the identity
};

namespace detail {

// Second-order centered discretization of -(mu Lap + (lam+mu) grad div) with
// an optional zero-order SPD term Z. Dirichlet rows are eliminated: masked
// nodes read as zero and are never unknowns.
class LameGridOperator {
public:
    LameGridOperator(const GridField& proto, const LameParams& p, const Eigen::Matrix2d& zero_order)
        : proto_(proto), p_(p), z_(zero_order) {
        const int n = proto.n;
        for (int j = 0; j <= n; ++j)
            for (int i = 0; i <= n; ++i)
                if (proto.fluid(i, j)) dof_.push_back(proto.idx(i, j));
        index_.assign(size_t(n + 1) * (n + 1), -1);
        for (size_t q = 0; q < dof_.size(); ++q) index_[dof_[q]] = int(q);
    }

    size_t size() const { return 2 * dof_.size(); }

    void apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const {
        const int n = proto_.n;
        const double h2 = proto_.h * proto_.h;
        const double lam = p_.lambda, mu = p_.mu;
        y.setZero();
        auto val = [&](int i, int j, int c) -> double {
            if (i < 0 || j < 0 || i > n || j > n) return 0.0;
            int q = index_[size_t(j) * (n + 1) + i];
            return (q < 0) ? 0.0 : x[2 * q + c];
        };
        for (size_t q = 0; q < dof_.size(); ++q) {
            int i = int(dof_[q] % (n + 1)), j = int(dof_[q] / (n + 1));
            for (int c = 0; c < 2; ++c) {
                double dxx = val(i + 1, j, c) - 2.0 * val(i, j, c) + val(i - 1, j, c);
                double dyy = val(i, j + 1, c) - 2.0 * val(i, j, c) + val(i, j - 1, c);
                int o = 1 - c;
                double dxy = (val(i + 1, j + 1, o) - val(i + 1, j - 1, o) -
                              val(i - 1, j + 1, o) + val(i - 1, j - 1, o)) / 4.0;
                double along = (c == 0) ? dxx : dyy;
                double across = (c == 0) ? dyy : dxx;
                double lap_term = (lam + 2.0 * mu) * along + mu * across + (lam + mu) * dxy;
                double zv = z_(c, 0) * val(i, j, 0) + z_(c, 1) * val(i, j, 1);
                y[2 * q + c] = -lap_term / h2 + zv;
            }
        }
    }

    Eigen::VectorXd gather(const GridField& g) const {
        Eigen::VectorXd x(size());
        for (size_t q = 0; q < dof_.size(); ++q) {
            x[2 * q] = g.values[2 * dof_[q]];
            x[2 * q + 1] = g.values[2 * dof_[q] + 1];
        }
        return x;
    }
    void scatter(const Eigen::VectorXd& x, GridField& g) const {
        g.values.setZero();
        for (size_t q = 0; q < dof_.size(); ++q) {
            g.values[2 * dof_[q]] = x[2 * q];
            g.values[2 * dof_[q] + 1] = x[2 * q + 1];
        }
    }

private:
    const GridField& proto_;
    LameParams p_;
    Eigen::Matrix2d z_;
    std::vector<size_t> dof_;
    std::vector<int> index_;
};

// conjugate gradients with diagonal scaling on the SPD discrete form
inline int conjugate_gradient(const LameGridOperator& op, const Eigen::VectorXd& b,
                              Eigen::VectorXd& x, double tol, int maxit,
                              double* rel_res_out = nullptr) {
    Eigen::VectorXd r = b, ap(b.size());
    x = Eigen::VectorXd::Zero(b.size());
    double bnorm = b.norm();
    if (bnorm == 0.0) {
        if (rel_res_out) *rel_res_out = 0.0;
        return 0;
    }
    Eigen::VectorXd p = r;
    double rr = r.squaredNorm();
    int it = 0;
    for (; it < maxit; ++it) {
        op.apply(p, ap);
        double alpha = rr / p.dot(ap);
        x += alpha * p;
        r -= alpha * ap;
        double rr_new = r.squaredNorm();
        if (std::sqrt(rr_new) <= tol * bnorm) {
            rr = rr_new;
            break;
        }
        p = r + (rr_new / rr) * p;
        rr = rr_new;
    }
    if (rel_res_out) *rel_res_out = std::sqrt(rr) / bnorm;
    return it;
}

// exact discrete counterpart of the bilinear form used by the operator:
// forward-difference squares for the unmixed parts, centered products for the
// mixed term; equals x^T A x up to round-off
inline double discrete_energy(const GridField& u, const LameParams& p) {
    const int n = u.n;
    const double lam = p.lambda, mu = p.mu;
    double e = 0.0;
    auto v = [&](int i, int j, int c) -> double {
        if (i < 0 || j < 0 || i > n || j > n) return 0.0;
        return u.values[2 * u.idx(i, j) + c];
    };
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i) {
            for (int c = 0; c < 2; ++c) {
                if (i + 1 <= n) {
                    double d = v(i + 1, j, c) - v(i, j, c);
                    e += (c == 0 ? lam + 2.0 * mu : mu) * d * d;
                }
                if (j + 1 <= n) {
                    double d = v(i, j + 1, c) - v(i, j, c);
                    e += (c == 1 ? lam + 2.0 * mu : mu) * d * d;
                }
            }
            double d1u1 = (v(i + 1, j, 0) - v(i - 1, j, 0)) / 2.0;
            double d2u2 = (v(i, j + 1, 1) - v(i, j - 1, 1)) / 2.0;
            e += 2.0 * (lam + mu) * d1u1 * d2u2;
        }
    return e;  // h^2 area weight cancels against 1/h^2 in the differences
}

}  // namespace detail

struct FdOptions {
    double tol = 1e-10;
    int max_iterations = 200000;
    bool allow_subresolution = false;  // sub-critical surrogate: holes below h
};

// Direct oracle: -L[u] = f in the perforated square, u = 0 on holes and dD.
inline GridField solve_perforated(const PerforationSpec& perf, const FieldFn& f,
                                  const LameParams& p, int grid_n, FdReport* report = nullptr,
                                  const FdOptions& opt = {}) {
    if (!opt.allow_subresolution && grid_n < 8.0 / (perf.epsilon * perf.eta))
        throw std::invalid_argument(
            "solve_perforated: holes unresolved (grid_n < 8/(eps*eta))");
    GridField u(grid_n, &perf);
    detail::LameGridOperator op(u, p, Eigen::Matrix2d::Zero());
    GridField frhs(grid_n, &perf);
    frhs.fill(f);
    Eigen::VectorXd b = op.gather(frhs);
    Eigen::VectorXd x;
    double rel = 0.0;
    int it = detail::conjugate_gradient(op, b, x, opt.tol, opt.max_iterations, &rel);
    if (rel > 100.0 * opt.tol)
        throw std::runtime_error("solve_perforated: conjugate gradients did not converge");
    op.scatter(x, u);
    if (report) {
        report->iterations = it;
        report->rel_residual = rel;
        report->energy = detail::discrete_energy(u, p);
        double work = 0.0;
        for (int j = 0; j <= grid_n; ++j)
            for (int i = 0; i <= grid_n; ++i)
                work += u.h * u.h * f(u.point(i, j)).dot(u.at(i, j));
        report->rhs_work = work;
        report->energy_residual =
            std::abs(report->energy - work) / std::max(1e-300, std::abs(work));
    }
    return u;
}

// FD solve of the oscillating-field equation -L[v] = e_k/sigma^2 on one
// eps-cell with periodic wrap and Dirichlet holes, using the same stencil as
// the oracle. Returns the m x m block of node values (m = eps * grid_n), the
// discretely consistent counterpart of the layer-potential field.
inline std::vector<Eigen::Vector2d> periodic_cell_block_solve(double epsilon, double eta,
                                                              const Curve& curve,
                                                              const LameParams& p, int grid_n,
                                                              int k, const FdOptions& opt = {}) {
    double bd = epsilon * grid_n;
    int m = int(std::lround(bd));
    if (std::abs(bd - m) > 1e-12 || m <= 2)
        throw std::invalid_argument("periodic_cell_block_solve: eps must be a multiple of h");
    double h = 1.0 / grid_n;
    double scale = epsilon * eta;
    auto hole = [&](int i, int j) {
        double x = i * h - epsilon * std::round(i * h / epsilon);
        double y = j * h - epsilon * std::round(j * h / epsilon);
        Eigen::Vector2d d(x / scale, y / scale);
        return d.norm() <= curve.r2 + 1e-15 && curve.contains(d);
    };
    std::vector<int> index(size_t(m) * m, -1);
    std::vector<size_t> dof;
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < m; ++i)
            if (!hole(i, j)) {
                index[size_t(j) * m + i] = int(dof.size());
                dof.push_back(size_t(j) * m + i);
            }
    const double lam = p.lambda, mu = p.mu;
    auto apply = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) {
        auto val = [&](int i, int j, int c) -> double {
            i = (i % m + m) % m;
            j = (j % m + m) % m;
            int q = index[size_t(j) * m + i];
            return (q < 0) ? 0.0 : x[2 * q + c];
        };
        for (size_t q = 0; q < dof.size(); ++q) {
            int i = int(dof[q] % m), j = int(dof[q] / m);
            for (int c = 0; c < 2; ++c) {
                double dxx = val(i + 1, j, c) - 2.0 * val(i, j, c) + val(i - 1, j, c);
                double dyy = val(i, j + 1, c) - 2.0 * val(i, j, c) + val(i, j - 1, c);
                int o = 1 - c;
                double dxy = (val(i + 1, j + 1, o) - val(i + 1, j - 1, o) -
                              val(i - 1, j + 1, o) + val(i - 1, j - 1, o)) / 4.0;
                double along = (c == 0) ? dxx : dyy;
                double across = (c == 0) ? dyy : dxx;
                y[2 * q + c] = -((lam + 2.0 * mu) * along + mu * across + (lam + mu) * dxy) /
                               (h * h);
            }
        }
    };
    double sig = sigma(epsilon, eta, 2);
    Eigen::VectorXd b(2 * dof.size());
    for (size_t q = 0; q < dof.size(); ++q) {
        b[2 * q] = (k == 0) ? 1.0 / (sig * sig) : 0.0;
        b[2 * q + 1] = (k == 1) ? 1.0 / (sig * sig) : 0.0;
    }
    Eigen::VectorXd x = Eigen::VectorXd::Zero(b.size()), r = b, pvec = r, ap(b.size());
    double bnorm = b.norm(), rr = r.squaredNorm();
    for (int it = 0; it < opt.max_iterations; ++it) {
        apply(pvec, ap);
        double alpha = rr / pvec.dot(ap);
        x += alpha * pvec;
        r -= alpha * ap;
        double rr_new = r.squaredNorm();
        if (std::sqrt(rr_new) <= opt.tol * bnorm) break;
        pvec = r + (rr_new / rr) * pvec;
        rr = rr_new;
    }
    std::vector<Eigen::Vector2d> block(size_t(m) * m, Eigen::Vector2d::Zero());
    for (size_t q = 0; q < dof.size(); ++q)
        block[dof[q]] = {x[2 * q], x[2 * q + 1]};
    return block;
}

// Effective models: super-critical is algebra, critical and sub-critical are
// hole-free Dirichlet solves (with and without the zero-order term M/sigma0^2).
inline GridField solve_effective(Regime regime, const Eigen::Matrix2d& m, double sigma0,
                                 const FieldFn& f, const LameParams& p, int grid_n,
                                 FdReport* report = nullptr, const FdOptions& opt = {}) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(0.5 * (m + m.transpose()));
    if (regime != Regime::sub_critical && es.eigenvalues().minCoeff() <= 0.0)
        throw std::invalid_argument("solve_effective: M must be positive definite");
    if (regime == Regime::super_critical || regime == Regime::classical) {
        GridField u(grid_n);
        Eigen::Matrix2d minv = m.inverse();
        u.fill([&](const Eigen::Vector2d& x) { return Eigen::Vector2d(minv * f(x)); }, false);
        return u;
    }
    Eigen::Matrix2d zero_order = Eigen::Matrix2d::Zero();
    if (regime == Regime::critical) {
        if (!(sigma0 > 0.0))
            throw std::invalid_argument("solve_effective: critical regime needs sigma0 > 0");
        zero_order = m / (sigma0 * sigma0);
    }
    GridField u(grid_n);
    detail::LameGridOperator op(u, p, zero_order);
    GridField frhs(grid_n);
    frhs.fill(f);
    Eigen::VectorXd b = op.gather(frhs);
    Eigen::VectorXd x;
    double rel = 0.0;
    int it = detail::conjugate_gradient(op, b, x, opt.tol, opt.max_iterations, &rel);
    if (rel > 100.0 * opt.tol)
        throw std::runtime_error("solve_effective: conjugate gradients did not converge");
    op.scatter(x, u);
    if (report) {
        report->iterations = it;
        report->rel_residual = rel;
    }
    return u;
}

}  // namespace perfhom

#endif
