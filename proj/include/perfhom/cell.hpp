#ifndef PERFHOM_CELL_HPP
#define PERFHOM_CELL_HPP

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <vector>

#include "perfhom/fit.hpp"
#include "perfhom/kernel_basis.hpp"
#include "perfhom/layer_potential.hpp"
#include "perfhom/periodic_solve.hpp"

namespace perfhom {

enum class Regime { sub_critical, critical, super_critical, classical };

inline const char* regime_name(Regime r) {
    switch (r) {
        case Regime::sub_critical: return "sub";
        case Regime::critical: return "critical";
        case Regime::super_critical: return "super";
        case Regime::classical: return "classical";
    }
    return "?";
}

// sigma_eps^2 = eps^2 eta^{-(d-2)} (d >= 3), eps^2 |log eta| (d = 2)
inline double sigma(double epsilon, double eta, int d) {
    if (!(epsilon > 0.0 && epsilon < 1.0 && eta > 0.0 && eta < 1.0))
        throw std::invalid_argument("sigma: epsilon, eta must lie in (0,1)");
    if (d == 3) return epsilon * std::sqrt(1.0 / eta);
    if (d == 2) return epsilon * std::sqrt(std::abs(std::log(eta)));
    throw std::invalid_argument("sigma: d must be 2 or 3");
}

// Hole-cell ratio laws. The asymptotic regime is declared by the law, not
// inferred from finitely many samples.
//   fixed:v        eta = v                      (classical)
//   power:p        eta = eps^p                  (2D: super-critical)
//   exp:a          eta = exp(-a/eps^2)          (2D: critical, sigma0^2 = a)
//   subexp:q       eta = exp(-eps^{-(2+q)})     (2D: sub-critical, sigma^2 = eps^{-q})
struct EtaLaw {
    enum class Kind { fixed, power, exponential, subexponential } kind = Kind::fixed;
    double param = 0.25;

    double eval(double eps) const {
        switch (kind) {
            case Kind::fixed: return param;
            case Kind::power: return std::pow(eps, param);
            case Kind::exponential: return std::exp(-param / (eps * eps));
            case Kind::subexponential: return std::exp(-std::pow(eps, -(2.0 + param)));
        }
        return param;
    }
    Regime classify() const {
        switch (kind) {
            case Kind::fixed: return Regime::classical;
            case Kind::power: return Regime::super_critical;
            case Kind::exponential: return Regime::critical;
            case Kind::subexponential: return Regime::sub_critical;
        }
        return Regime::classical;
    }
    static EtaLaw parse(const std::string& s) {
        auto colon = s.find(':');
        if (colon == std::string::npos) throw std::invalid_argument("EtaLaw: expected kind:param");
        std::string name = s.substr(0, colon);
        double v = std::stod(s.substr(colon + 1));
        EtaLaw law;
        law.param = v;
        if (name == "fixed") law.kind = Kind::fixed;
        else if (name == "power") law.kind = Kind::power;
        else if (name == "exp") law.kind = Kind::exponential;
        else if (name == "subexp") law.kind = Kind::subexponential;
        else throw std::invalid_argument("EtaLaw: unknown kind '" + name + "'");
        return law;
    }
    std::string to_string() const {
        switch (kind) {
            case Kind::fixed: return "fixed:" + std::to_string(param);
            case Kind::power: return "power:" + std::to_string(param);
            case Kind::exponential: return "exp:" + std::to_string(param);
            case Kind::subexponential: return "subexp:" + std::to_string(param);
        }
        return "";
    }
};

// Solution of the rescaled cell problem
//   -L[chi_k] = eta^2 e_k in (1/eta) T^2 \ T,  chi_k = 0 in T,
// represented as chi_k = G^eta_k + c^eta_k + D^eta_T[g_k] on the fluid part.
class CellSolution {
public:
    double eta = 0.0;
    LameParams params;
    std::shared_ptr<const Panelization> pan;
    std::shared_ptr<const PeriodicGreen> pg;
    KernelBasis kb;
    std::array<DensityField, 2> g;         // periodic Dirichlet densities
    std::array<Eigen::Vector2d, 2> c_eta;  // constant parts Pi0[-G^eta|dT]
    std::array<DensityField, 2> h_eta;     // range parts Pi1[-G^eta|dT]
    std::array<Eigen::Vector2d, 2> g_mean;
    std::array<DensityField, 2> g_prime;
    std::array<double, 2> balance_residual{};  // |eta^2|T|<g> - eta Pi0 K1[g']|
    double gprime_l2 = 0.0;
    PeriodicSolveReport solve_report;

    double cell_side() const { return 1.0 / eta; }

    bool in_hole(const Eigen::Vector2d& x) const { return pan->curve->contains(x); }

    // points sitting exactly on a quadrature node carry the Dirichlet value
    bool on_boundary(const Eigen::Vector2d& x) const {
        double r = x.norm();
        double r1 = pan->curve->r1, r2 = pan->curve->r2;
        if (r < r1 - 1e-9 || r > r2 + 1e-9) return false;
        for (const auto& node : grid_[0].x)
            if ((x - node).squaredNorm() < 1e-20) return true;
        return false;
    }

    // chi_k at a fluid point of the closed cell (zero inside the hole)
    Eigen::Vector2d chi(int k, const Eigen::Vector2d& x) const {
        if (in_hole(x) || on_boundary(x)) return Eigen::Vector2d::Zero();
        ScaledGreen sg(pg_shared(), eta);
        Eigen::Vector2d v = sg.value(x).col(k);
        return v + c_eta[k] + grid_[k].dbl(x, params, pg.get(), eta);
    }

    // all components at once (shares the scaled-Green evaluation)
    Eigen::Matrix2d chi_all(const Eigen::Vector2d& x) const {
        if (in_hole(x) || on_boundary(x)) return Eigen::Matrix2d::Zero();
        ScaledGreen sg(pg_shared(), eta);
        Eigen::Matrix2d v = sg.value(x);
        for (int k = 0; k < 2; ++k)
            v.col(k) += c_eta[k] + grid_[k].dbl(x, params, pg.get(), eta);
        return v;
    }

    // sup over sampled boundary nodes of the extrapolated exterior trace
    double boundary_trace_residual(int stride = 16) const {
        TraceLadder lad = TraceLadder::for_pan(*pan);
        std::array<EvalGrid, 2> fine = {EvalGrid::build(*pan, g[0], lad.upsample),
                                        EvalGrid::build(*pan, g[1], lad.upsample)};
        double worst = 0.0;
        for (int i = 0; i < pan->n_nodes; i += stride) {
            for (int k = 0; k < 2; ++k) {
                Eigen::Vector2d bd =
                    Eigen::Vector2d(kelvin2(pan->x[i], params).col(k)) +
                    Eigen::Vector2d(pg->remainder_wrapped(eta * pan->x[i]).col(k)) + c_eta[k];
                Eigen::Vector2d dl =
                    trace(fine[k], *pan, TraceKind::dbl, i, +1, params, lad, pg.get(), eta);
                worst = std::max(worst, (bd + dl).lpNorm<Eigen::Infinity>());
            }
        }
        return worst;
    }

    // finite-difference residual of -L[chi_k] = eta^2 e_k at a probe
    double pde_residual(int k, const Eigen::Vector2d& x, double h = 1e-3) const {
        auto col = [&](const Eigen::Vector2d& y) { return chi(k, y); };
        Eigen::Vector2d lap = Eigen::Vector2d::Zero();
        for (int i = 0; i < 2; ++i) {
            Eigen::Vector2d e = Eigen::Vector2d::Zero();
            e[i] = h;
            lap += (col(x + e) - 2.0 * col(x) + col(x - e)) / (h * h);
        }
        auto divf = [&](const Eigen::Vector2d& y) {
            double d = 0.0;
            for (int i = 0; i < 2; ++i) {
                Eigen::Vector2d e = Eigen::Vector2d::Zero();
                e[i] = h;
                d += (col(y + e)[i] - col(y - e)[i]) / (2.0 * h);
            }
            return d;
        };
        Eigen::Vector2d gd;
        for (int i = 0; i < 2; ++i) {
            Eigen::Vector2d e = Eigen::Vector2d::Zero();
            e[i] = h;
            gd[i] = (divf(x + e) - divf(x - e)) / (2.0 * h);
        }
        Eigen::Vector2d res = params.mu * lap + (params.lambda + params.mu) * gd +
                              eta * eta * Eigen::Vector2d::Unit(k);
        return res.norm();
    }

    void finalize_grids() {
        for (int k = 0; k < 2; ++k) grid_[k] = EvalGrid::build(*pan, g[k], dbl_upsample_);
    }

private:
    std::shared_ptr<const PeriodicGreen> pg_shared() const { return pg; }
    std::array<EvalGrid, 2> grid_;
    int dbl_upsample_ = 4;
    friend CellSolution solve_cell(const Curve&, double, const LameParams&, int,
                                   std::shared_ptr<const PeriodicGreen>);
};

inline CellSolution solve_cell(const Curve& curve, double eta, const LameParams& params,
                               int n_nodes = 256,
                               std::shared_ptr<const PeriodicGreen> pg = nullptr) {
    if (!(eta > 0.0 && eta <= 0.25))
        throw std::invalid_argument("solve_cell: eta must lie in (0, 1/4] (perturbation regime)");
    CellSolution cs;
    cs.eta = eta;
    cs.params = params;
    if (!pg) {
        auto owned = std::make_shared<PeriodicGreen>(params);
        owned->build_table(256);
        pg = owned;
    }
    cs.pg = pg;
    auto pan = std::make_shared<Panelization>(panelize(curve, n_nodes));
    cs.pan = pan;

    // kernel basis; on gap failure retry once with the 0.9-rescaled hole
    try {
        cs.kb = kernel_basis(pan, params);
    } catch (const std::runtime_error&) {
        Curve shrunk = curve;
        if (curve.kind == CurveKind::circle) shrunk = make_curve(curve.kind, {0.9 * curve.shape[0]});
        else if (curve.kind == CurveKind::ellipse)
            shrunk = make_curve(curve.kind, {0.9 * curve.shape[0], 0.9 * curve.shape[1]});
        else
            throw;
        return solve_cell(shrunk, eta / 0.9, params, n_nodes, pg);
    }

    auto k_eta = assemble(pan, OperatorLabel::K_eta, params, pg.get(), eta);
    auto k1 = assemble(pan, OperatorLabel::D_eta_restricted, params, pg.get(), eta);
    double hole_area = curve.area;

    for (int k = 0; k < 2; ++k) {
        DensityField b(pan);
        for (int i = 0; i < n_nodes; ++i) {
            Eigen::Vector2d gk = kelvin2(pan->x[i], params).col(k);
            gk += Eigen::Vector2d(pg->remainder_wrapped(eta * pan->x[i]).col(k));
            b.set(i, -gk);
        }
        Decomposition dec = decompose(cs.kb, b);
        cs.c_eta[k] = dec.pi0;
        cs.h_eta[k] = dec.pi1;
        cs.g[k] = solve_periodic_dirichlet(k_eta, dec.pi1, &cs.solve_report);
        cs.g_mean[k] = cs.g[k].mean();
        cs.g_prime[k] = cs.g[k].fluctuation();
        cs.gprime_l2 = std::max(cs.gprime_l2, l2_norm(cs.g_prime[k]));

        // Pi0-projected balance of the solved equation:
        //   -eta^2 |T| <g> + eta Pi0 K1[g'] = 0
        DensityField k1g = k1.apply(cs.g_prime[k]);
        Decomposition pk = decompose(cs.kb, k1g);
        Eigen::Vector2d bal =
            -eta * eta * hole_area * cs.g_mean[k] + eta * pk.pi0;
        cs.balance_residual[k] = bal.lpNorm<Eigen::Infinity>();
    }
    cs.finalize_grids();
    return cs;
}

// ---- masked-grid quadrature over the scaled cell minus the hole ----

// Composite sampler: a coarse grid over the whole cell plus a fine patch
// around the hole where chi varies on the unit scale. The patch boundary is
// aligned to coarse cells so the two regions tile exactly. The visitor sees
// only fluid midpoints, with their cell areas.
struct CellQuadrature {
    template <class Visitor>
    static void sweep(const CellSolution& cs, int grid_n, Visitor&& visit) {
        double side = cs.cell_side();
        double h = side / grid_n;
        double hole_r = cs.pan->curve->r2;
        double want = std::min(0.5 * side, std::max(4.0 * hole_r, 2.0));
        int acells = std::max(1, int(std::ceil(want / h)));
        double pw = std::min(acells * h, 0.5 * side);
        bool whole_cell_fine = (2.0 * pw >= side - 0.5 * h);

        if (!whole_cell_fine) {
            for (int j = 0; j < grid_n; ++j)
                for (int i = 0; i < grid_n; ++i) {
                    Eigen::Vector2d x(-0.5 * side + (i + 0.5) * h, -0.5 * side + (j + 0.5) * h);
                    if (std::abs(x.x()) < pw && std::abs(x.y()) < pw) continue;
                    visit(x, h * h);
                }
        }
        double pside = whole_cell_fine ? side : 2.0 * pw;
        double ph = pside / grid_n;
        // cells straddling the hole boundary are subsampled 4x4 to tame the
        // staircase masking error
        double r1 = cs.pan->curve->r1, r2 = cs.pan->curve->r2;
        double band = 1.5 * ph;
        for (int j = 0; j < grid_n; ++j)
            for (int i = 0; i < grid_n; ++i) {
                Eigen::Vector2d x(-0.5 * pside + (i + 0.5) * ph, -0.5 * pside + (j + 0.5) * ph);
                double r = x.norm();
                if (r > r1 - band && r < r2 + band) {
                    double sh = ph / 4.0;
                    for (int b = 0; b < 4; ++b)
                        for (int a = 0; a < 4; ++a) {
                            Eigen::Vector2d xs(x.x() + (a - 1.5) * sh, x.y() + (b - 1.5) * sh);
                            if (cs.in_hole(xs)) continue;
                            visit(xs, sh * sh);
                        }
                } else {
                    if (cs.in_hole(x)) continue;
                    visit(x, ph * ph);
                }
            }
    }

    // integral of f over the cell minus the hole
    template <class F>
    static Eigen::Vector2d integrate(const CellSolution& cs, int grid_n, F&& f,
                                     double* fluid_area = nullptr) {
        Eigen::Vector2d acc = Eigen::Vector2d::Zero();
        double area = 0.0;
        sweep(cs, grid_n, [&](const Eigen::Vector2d& x, double w) {
            acc += w * f(x);
            area += w;
        });
        if (fluid_area) *fluid_area = area;
        return acc;
    }
};

// one-pass metrics over the composite grid: averages of both chi columns and,
// when a limit value is supplied, the L2(D) distances ||v_k - limit e_k||
struct CellMetrics {
    Eigen::Matrix2d chi_avg = Eigen::Matrix2d::Zero();  // over cell minus hole
    std::array<double, 2> v_l2 = {0.0, 0.0};
    double fluid_area = 0.0;
};

inline CellMetrics cell_metrics(const CellSolution& cs, int grid_n, const double* limit = nullptr) {
    if (grid_n < 128) throw std::invalid_argument("cell_average: grid_n >= 128 required");
    CellMetrics out;
    double side = cs.cell_side();
    double logfac = std::abs(std::log(cs.eta));
    Eigen::Matrix2d acc = Eigen::Matrix2d::Zero();
    std::array<double, 2> ms = {0.0, 0.0};
    double area = 0.0;
    CellQuadrature::sweep(cs, grid_n, [&](const Eigen::Vector2d& x, double wcell) {
        Eigen::Matrix2d chi = cs.chi_all(x);
        acc += wcell * chi;
        area += wcell;
        if (limit)
            for (int k = 0; k < 2; ++k)
                ms[k] += wcell * (Eigen::Vector2d(chi.col(k)) / logfac -
                                  (*limit) * Eigen::Vector2d::Unit(k))
                                     .squaredNorm();
    });
    out.chi_avg = acc / area;
    out.fluid_area = area;
    if (limit) {
        double hole_area = cs.pan->curve->area;
        for (int k = 0; k < 2; ++k) {
            double hole_ms = (*limit) * (*limit) * hole_area;  // v = 0 in the hole
            out.v_l2[k] = std::sqrt((ms[k] + hole_ms) / (side * side));
        }
    }
    return out;
}

// <chi^eta_k> over (1/eta) T^2 \ T as columns of a 2x2 matrix
inline Eigen::Matrix2d cell_average(const CellSolution& cs, int grid_n = 256) {
    return cell_metrics(cs, grid_n).chi_avg;
}

// average of the Kelvin column over the full cell, singular block at 0 handled
// by the closed-form box integral of the log kernel
inline Eigen::Matrix2d gamma_cell_average(double eta, const LameParams& p, int grid_n = 256) {
    double side = 1.0 / eta;
    double h = side / grid_n;
    int bcells = std::max(1, int(std::ceil(0.05 * grid_n)));
    double d = bcells * h;
    Eigen::Matrix2d acc = Eigen::Matrix2d::Zero();
    for (int j = 0; j < grid_n; ++j)
        for (int i = 0; i < grid_n; ++i) {
            Eigen::Vector2d x(-0.5 * side + (i + 0.5) * h, -0.5 * side + (j + 0.5) * h);
            if (std::abs(x.x()) < d && std::abs(x.y()) < d) continue;
            acc += h * h * kelvin2(x, p);
        }
    double logint = 2.0 * d * d * (std::log(2.0 * d * d) - 3.0 + 0.5 * M_PI);
    acc += (p.c1 / (2.0 * M_PI)) * logint * Eigen::Matrix2d::Identity();
    acc -= (p.c2 / (2.0 * M_PI)) * (2.0 * d * d) * Eigen::Matrix2d::Identity();
    return acc / (side * side);
}

// semi-analytic reduction of the cell integral of D^eta[g'] onto boundary
// integrals (integration by parts; torus faces cancel by periodicity)
inline Eigen::Vector2d dbl_layer_cell_integral(const CellSolution& cs, int k) {
    const auto& pan = *cs.pan;
    const LameParams& p = cs.params;
    auto s_eta = assemble(cs.pan, OperatorLabel::S_eta, p, cs.pg.get(), cs.eta);
    DensityField nrm(cs.pan);
    for (int i = 0; i < pan.n_nodes; ++i) nrm.set(i, pan.nx[i]);
    DensityField s_n = s_eta.apply(nrm);  // (S^eta[N])^k(y)
    std::array<std::array<DensityField, 2>, 2> s_ni;  // S^eta[N^l e_i]
    for (int l = 0; l < 2; ++l)
        for (int i = 0; i < 2; ++i) {
            DensityField d(cs.pan);
            for (int q = 0; q < pan.n_nodes; ++q) {
                Eigen::Vector2d v = Eigen::Vector2d::Zero();
                v[i] = pan.nx[q][l];
                d.set(q, v);
            }
            s_ni[l][i] = s_eta.apply(d);
        }
    // integral^k = sum_q w_q g'^i(q) [ (lam+mu) N^i_q (S^eta[N])^k(q)
    //                                 + mu sum_l N^l_q (S^eta[N^l e_i])^k(q) ]
    const DensityField& gp = cs.g_prime[k];
    double val = 0.0;
    for (int q = 0; q < pan.n_nodes; ++q) {
        double wq = pan.w * pan.speed[q];
        for (int i = 0; i < 2; ++i) {
            double term = (p.lambda + p.mu) * pan.nx[q][i] * s_n.at(q)[k];
            for (int l = 0; l < 2; ++l) term += p.mu * pan.nx[q][l] * s_ni[l][i].at(q)[k];
            val += wq * gp.at(q)[i] * term;
        }
    }
    Eigen::Vector2d res = Eigen::Vector2d::Zero();
    res[k] = val;
    return res;
}

// ---- effective matrix ----

enum class MConvention { proof, display };

struct EffectiveMatrix {
    Eigen::Matrix2d m;
    Regime regime;
    bool from_cell_average = false;
};

// Dilute 2D: the rescaled cell solutions converge to (c1/2pi) e_k, so
// M^{-1} = (c1/2pi) I under the proof convention; the display convention
// M = (c1/2pi) I is kept behind the switch. Classical: M = (int_Y chi)^{-1}.
inline EffectiveMatrix effective_matrix(Regime regime, const LameParams& p,
                                        const CellSolution* cs = nullptr, int grid_n = 256,
                                        MConvention conv = MConvention::proof) {
    EffectiveMatrix em;
    em.regime = regime;
    if (regime == Regime::classical) {
        if (!cs) throw std::invalid_argument("effective_matrix: classical regime needs a cell solution");
        Eigen::Matrix2d chi_avg = cell_average(*cs, grid_n);
        double hole_frac = cs->eta * cs->eta * cs->pan->curve->area;
        Eigen::Matrix2d int_chi = (1.0 - hole_frac) * chi_avg;  // int_Y chi over the unit cell
        Eigen::Matrix2d sym = 0.5 * (int_chi + int_chi.transpose());
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(sym);
        if (es.eigenvalues().minCoeff() <= 0.0)
            throw std::runtime_error("effective_matrix: cell average not positive definite");
        em.m = sym.inverse();
        em.from_cell_average = true;
        return em;
    }
    double c = p.c1 / (2.0 * M_PI);
    em.m = (conv == MConvention::proof ? 1.0 / c : c) * Eigen::Matrix2d::Identity();
    return em;
}

// ---- oscillating test fields ----

// v^eps_k(x) = chi^eta_k(x/(eps eta)) / |log eta|, extended eps-periodically
// and by zero into the holes.
class OscillatingField {
public:
    OscillatingField(std::shared_ptr<const CellSolution> cs, double epsilon)
        : cs_(std::move(cs)), eps_(epsilon), logfac_(std::abs(std::log(cs_->eta))) {
        if (!(epsilon > 0.0 && epsilon < 1.0))
            throw std::invalid_argument("OscillatingField: epsilon in (0,1)");
    }

    double epsilon() const { return eps_; }
    const CellSolution& cell() const { return *cs_; }

    Eigen::Vector2d value(int k, const Eigen::Vector2d& x) const {
        Eigen::Vector2d z = (x / eps_).array().round();
        Eigen::Vector2d y = (x - eps_ * z) / (eps_ * cs_->eta);
        return cs_->chi(k, wrap_to_cell(y)) / logfac_;
    }

    bool in_hole(const Eigen::Vector2d& x) const {
        Eigen::Vector2d z = (x / eps_).array().round();
        Eigen::Vector2d y = (x - eps_ * z) / (eps_ * cs_->eta);
        return cs_->in_hole(wrap_to_cell(y));
    }

private:
    Eigen::Vector2d wrap_to_cell(const Eigen::Vector2d& y) const {
        double side = cs_->cell_side();
        return {y.x() - side * std::round(y.x() / side), y.y() - side * std::round(y.y() / side)};
    }
    std::shared_ptr<const CellSolution> cs_;
    double eps_;
    double logfac_;
};

// cell-level L2(D) distance of v^eps_k to limit*e_k (exact by periodicity:
// the epsilon-cells tile the unit square)
inline double v_l2_distance(const CellSolution& cs, double limit, int k, int grid_n = 256) {
    CellMetrics m = cell_metrics(cs, grid_n, &limit);
    return m.v_l2[k];
}

struct RateReport {
    std::vector<double> etas;
    std::vector<double> avg_err;   // |<v> - M^{-1} e_k| per eta
    std::vector<double> l2_err;    // ||v - M^{-1} e_k||_{L2(D)} per eta
    FitResult avg_fit;             // vs 1/|log eta|
    FitResult l2_fit;
};

// Dilute-limit study: averages and L2 distances against 1/|log eta|.
inline RateReport average_limit_check(const Curve& curve, const LameParams& p,
                                      const std::vector<double>& eta_list, int n_nodes = 256,
                                      int grid_n = 256,
                                      std::shared_ptr<const PeriodicGreen> pg = nullptr) {
    if (eta_list.size() < 3)
        throw std::invalid_argument("average_limit_check: need at least 3 eta values");
    for (size_t i = 1; i < eta_list.size(); ++i)
        if (!(eta_list[i] < eta_list[i - 1]))
            throw std::invalid_argument("average_limit_check: eta_list must decrease");
    if (!pg) {
        auto owned = std::make_shared<PeriodicGreen>(p);
        owned->build_table(256);
        pg = owned;
    }
    RateReport rep;
    double climit = p.c1 / (2.0 * M_PI);
    for (double eta : eta_list) {
        CellSolution cs = solve_cell(curve, eta, p, n_nodes, pg);
        double logfac = std::abs(std::log(eta));
        CellMetrics m = cell_metrics(cs, grid_n, &climit);
        double hole_frac = eta * eta * curve.area;
        double aerr = 0.0, l2 = 0.0;
        for (int k = 0; k < 2; ++k) {
            // <v> over the full cell (zero extension into the hole)
            Eigen::Vector2d va = (1.0 - hole_frac) * m.chi_avg.col(k) / logfac;
            aerr = std::max(aerr, (va - climit * Eigen::Vector2d::Unit(k)).lpNorm<Eigen::Infinity>());
            l2 = std::max(l2, m.v_l2[k]);
        }
        rep.etas.push_back(eta);
        rep.avg_err.push_back(aerr);
        rep.l2_err.push_back(l2);
    }
    std::vector<double> x(rep.etas.size());
    for (size_t i = 0; i < x.size(); ++i) x[i] = 1.0 / std::abs(std::log(rep.etas[i]));
    rep.avg_fit = fit_rate(x, rep.avg_err, FitLaw::power);
    rep.l2_fit = fit_rate(x, rep.l2_err, FitLaw::power);
    return rep;
}

}  // namespace perfhom

#endif
