#ifndef PERFHOM_BOUNDARY_OPERATOR_HPP
#define PERFHOM_BOUNDARY_OPERATOR_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <fstream>
#include <memory>
#include <optional>
#include <stdexcept>

#include "perfhom/density.hpp"
#include "perfhom/ewald.hpp"
#include "perfhom/kelvin.hpp"
#include "perfhom/quadrature.hpp"

namespace perfhom {

enum class OperatorLabel : int {
    S = 0,
    K = 1,
    Kstar = 2,
    S_eta = 3,
    K_eta = 4,
    Kstar_eta = 5,
    D_eta_restricted = 6,  // the remainder operator K^eta_{T,1} alone, unscaled
    Kdiff = 7,             // operator built from the compact difference kernel
};

// Dense Nystrom discretization acting on stacked node values. Matrix entry
// (2i+k, 2j+a) maps density component a at node j to output component k at
// node i and already contains quadrature weight and speed.
struct BoundaryOperator {
    std::shared_ptr<const Panelization> pan;
    OperatorLabel label;
    double eta = 0.0;
    Eigen::MatrixXd matrix;

    DensityField apply(const DensityField& phi) const {
        return DensityField(pan, matrix * phi.values);
    }
};

namespace detail {

// blocks of the free-space S with Kress log quadrature folded in
inline void assemble_single(const Panelization& pan, const LameParams& p, Eigen::MatrixXd& m) {
    const int n = pan.n_nodes;
    auto kress = kress_log_weights(n);
    const double w = pan.w;
    const double ca = p.c1 / (2.0 * M_PI), cb = p.c2 / (2.0 * M_PI);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double logpart, lsmooth;
            Eigen::Matrix2d q;
            if (i == j) {
                lsmooth = std::log(pan.speed[i]);
                Eigen::Vector2d t = pan.curve->derivative(pan.theta[i]) / pan.speed[i];
                q = t * t.transpose();
            } else {
                Eigen::Vector2d r = pan.x[i] - pan.x[j];
                double rho = r.squaredNorm();
                double sin2 = std::sin(0.5 * (pan.theta[i] - pan.theta[j]));
                lsmooth = 0.5 * std::log(rho / (4.0 * sin2 * sin2));
                q = (r * r.transpose()) / rho;
            }
            int d = ((i - j) % n + n) % n;
            logpart = 0.5 * kress[d];
            double diagc = ca * (logpart + w * lsmooth);
            double sj = pan.speed[j];
            for (int k = 0; k < 2; ++k)
                for (int a = 0; a < 2; ++a)
                    m(2 * i + k, 2 * j + a) =
                        sj * ((a == k ? diagc : 0.0) - cb * w * q(a, k));
        }
    }
}

enum class ConormalSide { source, target };  // K uses N_y, K* uses N_x

inline void assemble_conormal(const Panelization& pan, const LameParams& p, ConormalSide side,
                              Eigen::MatrixXd& m) {
    const int n = pan.n_nodes;
    const double w = pan.w;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            Eigen::Matrix2d blk;
            if (i == j) {
                Eigen::Vector2d t = pan.curve->derivative(pan.theta[i]) / pan.speed[i];
                blk = w * conormal_kernel_weak_diag(t, pan.gamma(i), p);
            } else {
                double oe = oddeven_pv_weight(i, j, n);
                if (side == ConormalSide::source) {
                    blk = w * conormal_kernel_weak(pan.x[i], pan.x[j], pan.nx[j], p);
                    if (oe != 0.0) blk += oe * conormal_kernel_cauchy(pan.x[i], pan.x[j], pan.nx[j], p);
                } else {
                    // K*_{ak}(x;y) = K_{ka}(y;x): transpose of the kernel with
                    // roles swapped and the normal taken at the target
                    blk = w * conormal_kernel_weak(pan.x[j], pan.x[i], pan.nx[i], p).transpose();
                    if (oe != 0.0)
                        blk += oe * conormal_kernel_cauchy(pan.x[i], pan.x[j], pan.nx[i], p);
                }
            }
            double sj = pan.speed[j];
            for (int k = 0; k < 2; ++k)
                for (int a = 0; a < 2; ++a) m(2 * i + k, 2 * j + a) = sj * blk(a, k);
        }
    }
}

// compact-difference operator: weak parts by plain trapezoid with the exact
// diagonal limit, antisymmetric part with the same odd-even rule as K and K*
// so that the matrix identity Kdiff = Kstar - K holds entrywise
inline void assemble_difference(const Panelization& pan, const LameParams& p, Eigen::MatrixXd& m) {
    const int n = pan.n_nodes;
    const double w = pan.w;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            Eigen::Matrix2d blk;
            if (i == j) {
                blk.setZero();  // weak-part diagonal limits of K* and K coincide
            } else {
                Eigen::Matrix2d kw = conormal_kernel_weak(pan.x[i], pan.x[j], pan.nx[j], p);
                Eigen::Matrix2d ksw =
                    conormal_kernel_weak(pan.x[j], pan.x[i], pan.nx[i], p).transpose();
                blk = w * (ksw - kw);
                double oe = oddeven_pv_weight(i, j, n);
                if (oe != 0.0)
                    blk += oe * (conormal_kernel_cauchy(pan.x[i], pan.x[j], pan.nx[i], p) -
                                 conormal_kernel_cauchy(pan.x[i], pan.x[j], pan.nx[j], p));
            }
            double sj = pan.speed[j];
            for (int k = 0; k < 2; ++k)
                for (int a = 0; a < 2; ++a) m(2 * i + k, 2 * j + a) = sj * blk(a, k);
        }
    }
}

// periodic remainder kernels; w = eta*(x - y), wrapped into the unit cell
// K1 (for K^eta):   K1_{ak} = -[(lam+mu)(div R_k)(w) N_y^a + mu N_y . grad R_{ak}(w)]
// K1* (for K^eta*): K1*_{ak} = +[(lam+mu)(div R_a)(w) N_x^k + mu N_x . grad R_{ak}(w)]
inline Eigen::Matrix2d remainder_dbl_kernel(const PeriodicGreen& pg, double eta,
                                            const Eigen::Vector2d& x, const Eigen::Vector2d& y,
                                            const Eigen::Vector2d& nrm, bool adjoint) {
    const LameParams& p = pg.params();
    auto g = pg.remainder_gradient_wrapped(eta * (x - y));
    Eigen::Vector2d divR(g[0](0, 0) + g[1](1, 0), g[0](0, 1) + g[1](1, 1));
    Eigen::Matrix2d ngrad = nrm[0] * g[0] + nrm[1] * g[1];
    Eigen::Matrix2d out;
    for (int a = 0; a < 2; ++a)
        for (int k = 0; k < 2; ++k) {
            double v = adjoint ? (p.lambda + p.mu) * divR[a] * nrm[k] + p.mu * ngrad(a, k)
                               : -((p.lambda + p.mu) * divR[k] * nrm[a] + p.mu * ngrad(a, k));
            out(a, k) = v;
        }
    return out;
}

inline void assemble_remainder(const Panelization& pan, const PeriodicGreen& pg, double eta,
                               OperatorLabel which, Eigen::MatrixXd& m) {
    const int n = pan.n_nodes;
    const double w = pan.w;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            Eigen::Matrix2d blk;
            if (which == OperatorLabel::S_eta) {
                blk = pg.remainder_wrapped(eta * (pan.x[i] - pan.x[j]));
            } else {
                bool adjoint = (which == OperatorLabel::Kstar_eta);
                const Eigen::Vector2d& nrm = adjoint ? pan.nx[i] : pan.nx[j];
                blk = remainder_dbl_kernel(pg, eta, pan.x[i], pan.x[j], nrm, adjoint);
            }
            double sj = w * pan.speed[j];
            for (int k = 0; k < 2; ++k)
                for (int a = 0; a < 2; ++a) m(2 * i + k, 2 * j + a) += sj * blk(a, k);
        }
    }
}

}  // namespace detail

// Assemble a dense boundary operator. Periodic labels need the PeriodicGreen
// table and eta; d = 2 throughout.
inline BoundaryOperator assemble(std::shared_ptr<const Panelization> pan, OperatorLabel label,
                                 const LameParams& p,
                                 const PeriodicGreen* pg = nullptr, double eta = 0.0) {
    const int n = pan->n_nodes;
    bool periodic = label == OperatorLabel::S_eta || label == OperatorLabel::K_eta ||
                    label == OperatorLabel::Kstar_eta || label == OperatorLabel::D_eta_restricted;
    if (periodic) {
        if (!pg) throw std::invalid_argument("assemble: periodic label needs a PeriodicGreen");
        if (!(eta > 0.0 && eta * pan->curve->r2 < 0.5))
            throw std::invalid_argument("assemble: eta outside (0, 1/(2 r2))");
    }
    BoundaryOperator op;
    op.pan = pan;
    op.label = label;
    op.eta = eta;
    op.matrix = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    switch (label) {
        case OperatorLabel::S:
            detail::assemble_single(*pan, p, op.matrix);
            break;
        case OperatorLabel::K:
            detail::assemble_conormal(*pan, p, detail::ConormalSide::source, op.matrix);
            break;
        case OperatorLabel::Kstar:
            detail::assemble_conormal(*pan, p, detail::ConormalSide::target, op.matrix);
            break;
        case OperatorLabel::Kdiff:
            detail::assemble_difference(*pan, p, op.matrix);
            break;
        case OperatorLabel::S_eta:
            detail::assemble_single(*pan, p, op.matrix);
            detail::assemble_remainder(*pan, *pg, eta, OperatorLabel::S_eta, op.matrix);
            break;
        case OperatorLabel::K_eta: {
            detail::assemble_conormal(*pan, p, detail::ConormalSide::source, op.matrix);
            Eigen::MatrixXd rem = Eigen::MatrixXd::Zero(2 * n, 2 * n);
            detail::assemble_remainder(*pan, *pg, eta, OperatorLabel::K_eta, rem);
            op.matrix += eta * rem;
            break;
        }
        case OperatorLabel::Kstar_eta: {
            detail::assemble_conormal(*pan, p, detail::ConormalSide::target, op.matrix);
            Eigen::MatrixXd rem = Eigen::MatrixXd::Zero(2 * n, 2 * n);
            detail::assemble_remainder(*pan, *pg, eta, OperatorLabel::Kstar_eta, rem);
            op.matrix += eta * rem;
            break;
        }
        case OperatorLabel::D_eta_restricted:
            detail::assemble_remainder(*pan, *pg, eta, OperatorLabel::K_eta, op.matrix);
            break;
    }
    return op;
}

// Flat binary export: magic, label, n, d, eta, then row-major doubles.
inline void export_operator(const BoundaryOperator& op, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("export_operator: cannot open " + path);
    const char magic[4] = {'P', 'H', 'O', 'P'};
    f.write(magic, 4);
    int32_t label = int32_t(op.label), n = op.pan->n_nodes, d = 2;
    f.write(reinterpret_cast<const char*>(&label), 4);
    f.write(reinterpret_cast<const char*>(&n), 4);
    f.write(reinterpret_cast<const char*>(&d), 4);
    f.write(reinterpret_cast<const char*>(&op.eta), 8);
    for (int i = 0; i < op.matrix.rows(); ++i)
        for (int j = 0; j < op.matrix.cols(); ++j) {
            double v = op.matrix(i, j);
            f.write(reinterpret_cast<const char*>(&v), 8);
        }
}

}  // namespace perfhom

#endif
