#ifndef PERFHOM_DISCREPANCY_HPP
#define PERFHOM_DISCREPANCY_HPP

#include <Eigen/Dense>
#include <stdexcept>

#include "perfhom/fd_solver.hpp"

namespace perfhom {

// v^eps_k sampled on the oracle grid; the field is eps-periodic and the
// eps-cells tile the unit square exactly, so one cell block is evaluated and
// tiled. Requires eps = m/grid_n for integer block size.
struct OscillatingGridFields {
    int n = 0;
    int block = 0;  // nodes per eps-cell edge
    std::array<GridField, 2> v;
    double fd_vs_bie_sup = -1.0;  // set by the FD-consistent path

    OscillatingGridFields() = default;

    // layer-potential field sampled at the grid nodes (default), or the
    // discretely consistent FD cell solve on the same stencil (needed by the
    // oscillating-test identity, whose continuum cancellation at the hole
    // boundary has no nodal counterpart for a sampled kinked field). The FD
    // path also records the sup distance between the two routes.
    OscillatingGridFields(const OscillatingField& field, int grid_n, bool fd_consistent = false)
        : n(grid_n) {
        double eps = field.epsilon();
        double bd = eps * grid_n;
        block = int(std::lround(bd));
        if (std::abs(bd - block) > 1e-12 || block <= 0)
            throw std::invalid_argument("OscillatingGridFields: eps must be a multiple of h");
        v = {GridField(grid_n), GridField(grid_n)};
        std::vector<std::array<Eigen::Vector2d, 2>> cache(size_t(block) * block);
        double h = 1.0 / grid_n;
        for (int j = 0; j < block; ++j)
            for (int i = 0; i < block; ++i) {
                Eigen::Vector2d x(i * h, j * h);
                cache[size_t(j) * block + i] = {field.value(0, x), field.value(1, x)};
            }
        if (fd_consistent) {
            const CellSolution& cs = field.cell();
            fd_vs_bie_sup = 0.0;
            for (int k = 0; k < 2; ++k) {
                auto blk = periodic_cell_block_solve(eps, cs.eta, *cs.pan->curve, cs.params,
                                                     grid_n, k);
                for (int j = 0; j < block; ++j)
                    for (int i = 0; i < block; ++i) {
                        Eigen::Vector2d& slot = cache[size_t(j) * block + i][k];
                        fd_vs_bie_sup = std::max(
                            fd_vs_bie_sup,
                            (slot - blk[size_t(j) * block + i]).lpNorm<Eigen::Infinity>());
                        slot = blk[size_t(j) * block + i];
                    }
            }
        }
        for (int j = 0; j <= grid_n; ++j)
            for (int i = 0; i <= grid_n; ++i) {
                auto& cv = cache[size_t(j % block) * block + (i % block)];
                v[0].set(i, j, cv[0]);
                v[1].set(i, j, cv[1]);
            }
    }
};

struct DiscrepancyField {
    Regime regime;
    GridField zeta;
    double l2 = 0.0;
    double h1_semi = 0.0;
};

// zeta per regime:
//   super:    u~/sigma_eps^2 - f^k v_k
//   critical: u~ - sigma_eps^2 (M u / sigma0^2)^k v_k
//   sub:      u~ - (M u)^k v_k
// coeff is f (super) or the effective solution u (critical/sub), given on the
// same grid. All fields must share the grid.
inline DiscrepancyField discrepancy(Regime regime, const GridField& u_perf,
                                    const GridField& coeff, const OscillatingGridFields& osc,
                                    const Eigen::Matrix2d& m, double sigma_eps,
                                    double sigma0 = 0.0) {
    if (u_perf.n != coeff.n || u_perf.n != osc.n)
        throw std::invalid_argument("discrepancy: grid mismatch");
    DiscrepancyField d;
    d.regime = regime;
    d.zeta = GridField(u_perf.n);
    d.zeta.mask = u_perf.mask;  // fluid structure of the perforated solve
    const int n = u_perf.n;
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i) {
            Eigen::Vector2d w;
            double vfac;
            if (regime == Regime::super_critical || regime == Regime::classical) {
                w = coeff.at(i, j);  // f
                vfac = 1.0;
            } else if (regime == Regime::critical) {
                if (!(sigma0 > 0.0))
                    throw std::invalid_argument("discrepancy: critical regime needs sigma0");
                w = (m * coeff.at(i, j)) / (sigma0 * sigma0);
                vfac = sigma_eps * sigma_eps;
            } else {
                w = m * coeff.at(i, j);
                vfac = 1.0;
            }
            Eigen::Vector2d base = u_perf.at(i, j);
            if (regime == Regime::super_critical || regime == Regime::classical)
                base /= (sigma_eps * sigma_eps);
            Eigen::Vector2d z =
                base - vfac * (w[0] * osc.v[0].at(i, j) + w[1] * osc.v[1].at(i, j));
            d.zeta.set(i, j, z);
        }
    d.l2 = d.zeta.l2_norm();
    d.h1_semi = d.zeta.h1_seminorm(true);
    return d;
}

// The five-integral identity of the oscillating-test-function argument,
// evaluated discretely:
//   I1 + I2 - I3 - I4 = I5
//   I1 = int mu (d_j u~^i) v^i (d_j phi)     I2 = int (lam+mu)(div u~)(grad phi . v)
//   I3 = int mu (d_j v^i) u~^i (d_j phi)     I4 = int (lam+mu)(div v)(grad phi . u~)
//   I5 = int phi (f . v - e_k . u~ / sigma^2)
struct OscTestReport {
    double integrals[5] = {0, 0, 0, 0, 0};
    double residual = 0.0;  // |I1+I2-I3-I4-I5| / max |I_j|
};

inline OscTestReport oscillating_test_identity(const GridField& u_perf,
                                               const OscillatingGridFields& osc, int k,
                                               const FieldFn& f,
                                               const std::function<double(const Eigen::Vector2d&)>& phi,
                                               double sigma_eps, const LameParams& p) {
    if (u_perf.n != osc.n) throw std::invalid_argument("oscillating_test_identity: grid mismatch");
    const int n = u_perf.n;
    const double h = u_perf.h;
    const GridField& v = osc.v[k];
    double i1 = 0, i2 = 0, i3 = 0, i4 = 0, i5 = 0;
    for (int j = 1; j < n; ++j)
        for (int i = 1; i < n; ++i) {
            Eigen::Vector2d x = u_perf.point(i, j);
            double ph = phi(x);
            Eigen::Vector2d gphi((phi({x.x() + h, x.y()}) - phi({x.x() - h, x.y()})) / (2 * h),
                                 (phi({x.x(), x.y() + h}) - phi({x.x(), x.y() - h})) / (2 * h));
            // centered gradients of the discrete fields (zero extension)
            Eigen::Matrix2d gu, gv;  // g(i,j) = d_j u^i
            gu.col(0) = (u_perf.at(i + 1, j) - u_perf.at(i - 1, j)) / (2 * h);
            gu.col(1) = (u_perf.at(i, j + 1) - u_perf.at(i, j - 1)) / (2 * h);
            gv.col(0) = (v.at(i + 1, j) - v.at(i - 1, j)) / (2 * h);
            gv.col(1) = (v.at(i, j + 1) - v.at(i, j - 1)) / (2 * h);
            Eigen::Vector2d uv = u_perf.at(i, j), vv = v.at(i, j);
            double w = h * h;
            i1 += w * p.mu * (gu.col(0).dot(vv) * gphi[0] + gu.col(1).dot(vv) * gphi[1]);
            i2 += w * (p.lambda + p.mu) * (gu(0, 0) + gu(1, 1)) * gphi.dot(vv);
            i3 += w * p.mu * (gv.col(0).dot(uv) * gphi[0] + gv.col(1).dot(uv) * gphi[1]);
            i4 += w * (p.lambda + p.mu) * (gv(0, 0) + gv(1, 1)) * gphi.dot(uv);
            i5 += w * ph *
                  (f(x).dot(vv) - uv[k] / (sigma_eps * sigma_eps));
        }
    OscTestReport rep;
    rep.integrals[0] = i1;
    rep.integrals[1] = i2;
    rep.integrals[2] = i3;
    rep.integrals[3] = i4;
    rep.integrals[4] = i5;
    double scale = 0.0;
    for (double t : rep.integrals) scale = std::max(scale, std::abs(t));
    rep.residual = std::abs(i1 + i2 - i3 - i4 - i5) / std::max(scale, 1e-300);
    return rep;
}

// L2 norm of windowed local averages of (a - b): a weak-convergence surrogate.
// window is in physical units and must be at least 2 eps.
inline double weak_limit_metric(const GridField& a, const GridField& b, double window,
                                double eps) {
    if (a.n != b.n) throw std::invalid_argument("weak_limit_metric: grid mismatch");
    if (window < 2.0 * eps - 1e-12)
        throw std::invalid_argument("weak_limit_metric: window must be >= 2 eps");
    const int n = a.n;
    int wn = std::max(1, int(std::lround(window / a.h)));
    if (wn > n) wn = n;
    // prefix sums of the difference for O(1) box averages
    Eigen::MatrixXd p1 = Eigen::MatrixXd::Zero(n + 2, n + 2);
    Eigen::MatrixXd p2 = Eigen::MatrixXd::Zero(n + 2, n + 2);
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i) {
            Eigen::Vector2d d = a.at(i, j) - b.at(i, j);
            p1(i + 1, j + 1) = d.x() + p1(i, j + 1) + p1(i + 1, j) - p1(i, j);
            p2(i + 1, j + 1) = d.y() + p2(i, j + 1) + p2(i + 1, j) - p2(i, j);
        }
    double acc = 0.0;
    int count = 0;
    for (int j = 0; j + wn <= n; ++j)
        for (int i = 0; i + wn <= n; ++i) {
            double cells = double(wn + 1) * (wn + 1);
            double m1 = (p1(i + wn + 1, j + wn + 1) - p1(i, j + wn + 1) - p1(i + wn + 1, j) +
                         p1(i, j)) / cells;
            double m2 = (p2(i + wn + 1, j + wn + 1) - p2(i, j + wn + 1) - p2(i + wn + 1, j) +
                         p2(i, j)) / cells;
            acc += m1 * m1 + m2 * m2;
            ++count;
        }
    return std::sqrt(acc / std::max(1, count));
}

}  // namespace perfhom

#endif
