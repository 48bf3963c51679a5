#ifndef PERFHOM_LAYER_POTENTIAL_HPP
#define PERFHOM_LAYER_POTENTIAL_HPP

#include <Eigen/Dense>
#include <array>
#include <memory>
#include <optional>
#include <stdexcept>

#include "perfhom/boundary_operator.hpp"
#include "perfhom/density.hpp"
#include "perfhom/ewald.hpp"
#include "perfhom/kelvin.hpp"

namespace perfhom {

// Off-boundary evaluation grid: a (possibly refined) copy of the node set with
// the density carried along by trigonometric interpolation. Geometry is
// re-evaluated analytically. Built once per density, reused for many targets;
// plain trapezoid is reliable once the target sits a few node spacings away.
struct EvalGrid {
    std::vector<Eigen::Vector2d> x, nx;
    std::vector<double> speed;
    std::vector<Eigen::Vector2d> phi;
    double w = 0.0;
    double max_speed = 0.0;

    static EvalGrid build(const Panelization& pan, const DensityField& density, int factor = 1) {
        EvalGrid g;
        int nf = pan.n_nodes * factor;
        g.w = 2.0 * M_PI / nf;
        g.x.resize(nf);
        g.nx.resize(nf);
        g.speed.resize(nf);
        g.phi.resize(nf);
        for (int i = 0; i < nf; ++i) {
            double t = g.w * i;
            g.x[i] = pan.curve->point(t);
            g.nx[i] = pan.curve->normal(t);
            g.speed[i] = pan.curve->derivative(t).norm();
            g.max_speed = std::max(g.max_speed, g.speed[i]);
        }
        if (factor == 1) {
            for (int i = 0; i < nf; ++i) g.phi[i] = density.at(i);
        } else {
            std::vector<double> c0(pan.n_nodes), c1(pan.n_nodes);
            for (int i = 0; i < pan.n_nodes; ++i) {
                c0[i] = density.at(i).x();
                c1[i] = density.at(i).y();
            }
            auto f0 = trig_upsample(c0, factor);
            auto f1 = trig_upsample(c1, factor);
            for (int i = 0; i < nf; ++i) g.phi[i] = Eigen::Vector2d(f0[i], f1[i]);
        }
        return g;
    }

    // distance to the curve in units of the local quadrature spacing
    double spacing_distance(const Eigen::Vector2d& p) const {
        double dmin = 1e300;
        for (size_t i = 0; i < x.size(); ++i) dmin = std::min(dmin, (p - x[i]).norm());
        return dmin / (w * max_speed);
    }

    void near_guard(const Eigen::Vector2d& p, bool allow_near = false) const {
        if (allow_near) return;
        if (spacing_distance(p) < 5.0)
            throw std::domain_error(
                "layer potential: target inside the unreliable near-boundary band; "
                "increase the upsampling factor");
    }

    Eigen::Vector2d single(const Eigen::Vector2d& p, const LameParams& prm) const {
        Eigen::Vector2d acc = Eigen::Vector2d::Zero();
        for (size_t j = 0; j < x.size(); ++j)
            acc += w * speed[j] * kelvin2(p - x[j], prm).transpose() * phi[j];
        return acc;
    }

    std::array<Eigen::Vector2d, 2> single_gradient(const Eigen::Vector2d& p,
                                                   const LameParams& prm) const {
        std::array<Eigen::Vector2d, 2> acc = {Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero()};
        for (size_t j = 0; j < x.size(); ++j) {
            auto grad = kelvin_gradient2(p - x[j], prm);
            for (int i = 0; i < 2; ++i) acc[i] += w * speed[j] * grad[i].transpose() * phi[j];
        }
        return acc;
    }

    Eigen::Vector2d single_conormal(const Eigen::Vector2d& p, const Eigen::Vector2d& nrm,
                                    const LameParams& prm) const {
        auto grad = single_gradient(p, prm);
        double div = grad[0][0] + grad[1][1];
        Eigen::Matrix2d ju;  // ju(i,j) = d_j u^i
        ju << grad[0][0], grad[1][0], grad[0][1], grad[1][1];
        return (prm.lambda + prm.mu) * div * nrm + prm.mu * ju * nrm;
    }

    // free-space double layer, or the periodic one when pg is given
    Eigen::Vector2d dbl(const Eigen::Vector2d& p, const LameParams& prm,
                        const PeriodicGreen* pg = nullptr, double eta = 0.0) const {
        Eigen::Vector2d acc = Eigen::Vector2d::Zero();
        for (size_t j = 0; j < x.size(); ++j) {
            Eigen::Matrix2d blk = conormal_kernel(p, x[j], nx[j], prm);
            if (pg) blk += eta * detail::remainder_dbl_kernel(*pg, eta, p, x[j], nx[j], false);
            acc += w * speed[j] * blk.transpose() * phi[j];
        }
        return acc;
    }
};

// convenience single-shot wrappers
inline Eigen::Vector2d eval_single(const Panelization& pan, const DensityField& phi,
                                   const Eigen::Vector2d& p, const LameParams& prm,
                                   int upsample = 1, bool allow_near = false) {
    EvalGrid g = EvalGrid::build(pan, phi, upsample);
    g.near_guard(p, allow_near);
    return g.single(p, prm);
}

inline Eigen::Vector2d eval_double(const Panelization& pan, const DensityField& phi,
                                   const Eigen::Vector2d& p, const LameParams& prm,
                                   int upsample = 1, bool allow_near = false,
                                   const PeriodicGreen* pg = nullptr, double eta = 0.0) {
    EvalGrid g = EvalGrid::build(pan, phi, upsample);
    g.near_guard(p, allow_near);
    return g.dbl(p, prm, pg, eta);
}

// polynomial extrapolation to t = 0 through (t_m, v_m), Neville scheme
inline Eigen::Vector2d extrapolate_to_zero(const std::vector<double>& ts,
                                           const std::vector<Eigen::Vector2d>& vs) {
    std::vector<Eigen::Vector2d> p = vs;
    const int m = int(ts.size());
    for (int level = 1; level < m; ++level)
        for (int i = 0; i < m - level; ++i)
            p[i] = (ts[i + level] * p[i] - ts[i] * p[i + 1]) / (ts[i + level] - ts[i]);
    return p[0];
}

// Boundary traces by Richardson extrapolation along the normal.
// side = +1 approaches from the exterior, -1 from the interior.
struct TraceLadder {
    double t0 = 0.0;   // 0: pick 0.032 * r2 automatically
    int levels = 4;
    int upsample = 0;  // 0: smallest power of two keeping the last rung out of the near band

    static TraceLadder for_pan(const Panelization& pan, double t0_in = 0.0, int levels_in = 4) {
        TraceLadder lad;
        lad.t0 = (t0_in > 0.0) ? t0_in : 0.032 * pan.curve->r2;
        lad.levels = levels_in;
        double tmin = lad.t0 / double(1 << (levels_in - 1));
        double max_speed = 0.0;
        for (double s : pan.speed) max_speed = std::max(max_speed, s);
        double need = 5.5 * pan.w * max_speed / tmin;
        int f = 1;
        while (f < need && f < 128) f *= 2;
        lad.upsample = f;
        return lad;
    }
};

enum class TraceKind { single, single_conormal, dbl };

inline Eigen::Vector2d trace(const EvalGrid& g, const Panelization& pan, TraceKind kind, int node,
                             int side, const LameParams& prm, TraceLadder lad = {},
                             const PeriodicGreen* pg = nullptr, double eta = 0.0) {
    if (lad.t0 == 0.0) lad = TraceLadder::for_pan(pan);
    std::vector<double> ts(lad.levels);
    std::vector<Eigen::Vector2d> vs(lad.levels);
    for (int m = 0; m < lad.levels; ++m) {
        ts[m] = lad.t0 / double(1 << m);
        Eigen::Vector2d p = pan.x[node] + side * ts[m] * pan.nx[node];
        switch (kind) {
            case TraceKind::single: vs[m] = g.single(p, prm); break;
            case TraceKind::single_conormal: vs[m] = g.single_conormal(p, pan.nx[node], prm); break;
            case TraceKind::dbl: vs[m] = g.dbl(p, prm, pg, eta); break;
        }
    }
    return extrapolate_to_zero(ts, vs);
}

// Jump-relation report for a smooth density. Traces are extrapolated from
// off-boundary evaluations; operator values come from the dense matrices.
struct JumpReport {
    double single_continuity = 0.0;     // | S|+ - S|- |_inf
    double conormal_jump = 0.0;         // | (dS|+ - dS|-) - phi |_inf
    double conormal_vs_operator = 0.0;  // both sides vs (+-1/2 I + K*) phi
    double double_jump = 0.0;           // | (D|- - D|+) - sign * phi |_inf
    int double_jump_sign = 0;           // pinned sign convention
};

inline JumpReport verify_jumps(std::shared_ptr<const Panelization> pan, const DensityField& phi,
                               const LameParams& prm, int probe_stride = 16,
                               TraceLadder lad = {}) {
    if (lad.t0 == 0.0 || lad.upsample == 0) lad = TraceLadder::for_pan(*pan);
    JumpReport rep;
    BoundaryOperator kstar = assemble(pan, OperatorLabel::Kstar, prm);
    DensityField kphi = kstar.apply(phi);
    EvalGrid g = EvalGrid::build(*pan, phi, lad.upsample);
    {
        Eigen::Vector2d dm = trace(g, *pan, TraceKind::dbl, 0, -1, prm, lad);
        Eigen::Vector2d dp = trace(g, *pan, TraceKind::dbl, 0, +1, prm, lad);
        rep.double_jump_sign = ((dm - dp).dot(phi.at(0)) >= 0.0) ? +1 : -1;
    }
    for (int i = 0; i < pan->n_nodes; i += probe_stride) {
        Eigen::Vector2d sm = trace(g, *pan, TraceKind::single, i, -1, prm, lad);
        Eigen::Vector2d sp = trace(g, *pan, TraceKind::single, i, +1, prm, lad);
        rep.single_continuity = std::max(rep.single_continuity, (sp - sm).lpNorm<Eigen::Infinity>());

        Eigen::Vector2d cm = trace(g, *pan, TraceKind::single_conormal, i, -1, prm, lad);
        Eigen::Vector2d cp = trace(g, *pan, TraceKind::single_conormal, i, +1, prm, lad);
        rep.conormal_jump =
            std::max(rep.conormal_jump, ((cp - cm) - phi.at(i)).lpNorm<Eigen::Infinity>());
        Eigen::Vector2d op_p = 0.5 * phi.at(i) + kphi.at(i);
        Eigen::Vector2d op_m = -0.5 * phi.at(i) + kphi.at(i);
        rep.conormal_vs_operator =
            std::max({rep.conormal_vs_operator, (cp - op_p).lpNorm<Eigen::Infinity>(),
                      (cm - op_m).lpNorm<Eigen::Infinity>()});

        Eigen::Vector2d dm = trace(g, *pan, TraceKind::dbl, i, -1, prm, lad);
        Eigen::Vector2d dp = trace(g, *pan, TraceKind::dbl, i, +1, prm, lad);
        rep.double_jump = std::max(
            rep.double_jump,
            ((dm - dp) - double(rep.double_jump_sign) * phi.at(i)).lpNorm<Eigen::Infinity>());
    }
    return rep;
}

}  // namespace perfhom

#endif
