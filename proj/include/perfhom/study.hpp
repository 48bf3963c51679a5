#ifndef PERFHOM_STUDY_HPP
#define PERFHOM_STUDY_HPP

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "perfhom/config.hpp"
#include "perfhom/discrepancy.hpp"
#include "perfhom/fit.hpp"

namespace perfhom {

struct StudyConfig {
    std::string hole = "circle:0.25";
    double lambda = 1.0, mu = 1.0;
    int nodes = 256;
    double ewald_split = 4.0;
    int fourier_kmax = 12;
    double green_accuracy = 1e-8;
    int remainder_table = 256;
    std::string name = "all";
    std::vector<double> eta_list = {1e-2, 1e-3, 1e-4};
    std::vector<double> epsilon_list = {0.25, 0.125, 0.0625};
    std::string eta_law = "fixed:0.25";
    int grid = 256;
    int cell_grid = 256;
    std::string m_convention = "proof";
    double rate_tol = 0.25;
    unsigned seed = 12345;
    std::string out_dir;
    int workers = 1;

    LameParams params() const { return LameParams(lambda, mu, 2); }
    MConvention mconv() const {
        if (m_convention == "proof") return MConvention::proof;
        if (m_convention == "display") return MConvention::display;
        throw std::invalid_argument("StudyConfig: m_convention must be proof|display");
    }

    static StudyConfig from_config(const Config& c) {
        StudyConfig s;
        s.hole = c.get_or("problem", "hole", s.hole);
        s.lambda = c.get_double("problem", "lambda", s.lambda);
        s.mu = c.get_double("problem", "mu", s.mu);
        s.nodes = int(c.get_int("quadrature", "nodes", s.nodes));
        s.ewald_split = c.get_double("quadrature", "ewald_split", s.ewald_split);
        s.fourier_kmax = int(c.get_int("quadrature", "fourier_kmax", s.fourier_kmax));
        s.green_accuracy = c.get_double("quadrature", "green_accuracy", s.green_accuracy);
        s.remainder_table = int(c.get_int("quadrature", "remainder_table", s.remainder_table));
        s.name = c.get_or("study", "name", s.name);
        if (c.has("study", "eta_list")) s.eta_list = Config::parse_list(c.get("study", "eta_list"));
        if (c.has("study", "epsilon_list"))
            s.epsilon_list = Config::parse_list(c.get("study", "epsilon_list"));
        s.eta_law = c.get_or("study", "eta_law", s.eta_law);
        s.grid = int(c.get_int("study", "grid", s.grid));
        s.cell_grid = int(c.get_int("study", "cell_grid", s.cell_grid));
        s.m_convention = c.get_or("study", "m_convention", s.m_convention);
        s.rate_tol = c.get_double("study", "rate_tol", s.rate_tol);
        s.seed = unsigned(c.get_int("study", "seed", s.seed));
        s.out_dir = c.get_or("study", "out_dir", "");
        s.workers = int(c.get_int("study", "workers", s.workers));
        if (s.epsilon_list.empty() || s.eta_list.empty())
            throw std::invalid_argument("StudyConfig: empty epsilon/eta list");
        return s;
    }

    Config to_config() const {
        Config c;
        c.set("problem", "hole", hole);
        c.set("problem", "lambda", std::to_string(lambda));
        c.set("problem", "mu", std::to_string(mu));
        c.set("quadrature", "nodes", std::to_string(nodes));
        c.set("quadrature", "ewald_split", std::to_string(ewald_split));
        c.set("quadrature", "fourier_kmax", std::to_string(fourier_kmax));
        std::ostringstream acc;
        acc << green_accuracy;
        c.set("quadrature", "green_accuracy", acc.str());
        c.set("quadrature", "remainder_table", std::to_string(remainder_table));
        c.set("study", "name", name);
        auto join = [](const std::vector<double>& v) {
            std::ostringstream o;
            for (size_t i = 0; i < v.size(); ++i) o << (i ? "," : "") << v[i];
            return o.str();
        };
        c.set("study", "eta_list", join(eta_list));
        c.set("study", "epsilon_list", join(epsilon_list));
        c.set("study", "eta_law", eta_law);
        c.set("study", "grid", std::to_string(grid));
        c.set("study", "cell_grid", std::to_string(cell_grid));
        c.set("study", "m_convention", m_convention);
        c.set("study", "rate_tol", std::to_string(rate_tol));
        c.set("study", "seed", std::to_string(seed));
        c.set("study", "out_dir", out_dir);
        c.set("study", "workers", std::to_string(workers));
        return c;
    }

    std::shared_ptr<PeriodicGreen> make_green() const {
        auto pg = std::make_shared<PeriodicGreen>(
            params(), EwaldParams{ewald_split, fourier_kmax, green_accuracy});
        pg->build_table(remainder_table);
        return pg;
    }
};

struct StudyRecord {
    std::string study;
    std::string point;
    double epsilon = std::numeric_limits<double>::quiet_NaN();
    double eta = std::numeric_limits<double>::quiet_NaN();
    std::string quantity;
    double value = 0.0;
    double tolerance = 0.0;
    bool pass = true;
    double wall_ms = 0.0;
};

struct StudyOutcome {
    std::string name;
    std::vector<StudyRecord> records;
    bool pass = true;

    void add(StudyRecord r) {
        pass = pass && r.pass;
        records.push_back(std::move(r));
    }
    void absorb(const StudyOutcome& o) {
        pass = pass && o.pass;
        for (const auto& r : o.records) records.push_back(r);
    }
};

inline void write_records_csv(const std::vector<StudyRecord>& records, const std::string& path,
                              bool append = false) {
    bool fresh = !append || !std::filesystem::exists(path);
    std::ofstream f(path, append ? std::ios::app : std::ios::trunc);
    if (!f) throw std::runtime_error("write_records_csv: cannot open " + path);
    if (fresh) {
        f << "# perfhom-record-v1\n";
        f << "study,point,epsilon,eta,quantity,value,tolerance,status,wall_ms\n";
    }
    for (const auto& r : records) {
        f << r.study << "," << r.point << "," << std::setprecision(17) << r.epsilon << ","
          << r.eta << "," << r.quantity << "," << r.value << "," << r.tolerance << ","
          << (r.pass ? "pass" : "FAIL") << "," << std::setprecision(6) << r.wall_ms << "\n";
        f.flush();  // crash-safe append
    }
}

namespace detail {

class Stopwatch {
public:
    Stopwatch() : t0_(std::chrono::steady_clock::now()) {}
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point t0_;
};

// dispatch independent points to a small pool, keep record order by index
inline std::vector<StudyRecord> run_points(
    const std::vector<std::function<std::vector<StudyRecord>()>>& points, int workers) {
    std::vector<std::vector<StudyRecord>> results(points.size());
    if (workers <= 1) {
        for (size_t i = 0; i < points.size(); ++i) results[i] = points[i]();
    } else {
        std::atomic<size_t> next{0};
        auto worker = [&] {
            for (;;) {
                size_t i = next.fetch_add(1);
                if (i >= points.size()) break;
                results[i] = points[i]();
            }
        };
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    std::vector<StudyRecord> flat;
    for (auto& r : results)
        for (auto& rec : r) flat.push_back(std::move(rec));
    return flat;
}

inline DensityField trig_density(std::shared_ptr<const Panelization> pan, std::mt19937& rng,
                                 int degree = 3) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> coef(4 * (degree + 1));
    for (auto& c : coef) c = u(rng);
    DensityField f(pan);
    for (int i = 0; i < pan->n_nodes; ++i) {
        double t = pan->theta[i], v0 = 0.0, v1 = 0.0;
        for (int k = 0; k <= degree; ++k) {
            v0 += coef[4 * k] * std::cos(k * t) + coef[4 * k + 1] * std::sin(k * t);
            v1 += coef[4 * k + 2] * std::cos(k * t) + coef[4 * k + 3] * std::sin(k * t);
        }
        f.set(i, {v0, v1});
    }
    return f;
}

inline Eigen::Vector2d study_forcing(const Eigen::Vector2d& x) {
    double b = x.x() * (1 - x.x()) * x.y() * (1 - x.y());
    return {16.0 * b, 8.0 * b * std::sin(M_PI * x.x())};
}

inline double study_bump(const Eigen::Vector2d& x) {
    double b = 16.0 * x.x() * (1 - x.x()) * x.y() * (1 - x.y());
    return b * b;
}

}  // namespace detail

// ---- named studies; each acceptance criterion maps to exactly one ----

namespace studies {

// criterion 1: Nystrom identity suite
inline StudyOutcome kernel_identity(const StudyConfig& cfg) {
    StudyOutcome out;
    out.name = "kernel_identity";
    LameParams p = cfg.params();
    auto pg = cfg.make_green();
    for (const std::string holespec : {std::string("circle:0.25"), std::string("kite:default")}) {
        detail::Stopwatch sw;
        Curve curve = parse_curve(holespec);
        auto pan = std::make_shared<Panelization>(panelize(curve, cfg.nodes));
        auto K = assemble(pan, OperatorLabel::K, p);
        double err = 0.0;
        for (int j = 0; j < 2; ++j) {
            DensityField ej = constant_density(pan, Eigen::Vector2d::Unit(j));
            DensityField r = K.apply(ej);
            for (int i = 0; i < pan->n_nodes; ++i)
                err = std::max(err,
                               (r.at(i) - 0.5 * Eigen::Vector2d::Unit(j)).lpNorm<Eigen::Infinity>());
        }
        out.add({out.name, holespec, NAN, NAN, "K_const_identity_inf", err, 1e-8, err <= 1e-8,
                 sw.ms()});
        for (double eta : {0.05, 0.1, 0.2}) {
            detail::Stopwatch sw2;
            auto keta = assemble(pan, OperatorLabel::K_eta, p, pg.get(), eta);
            double expect = -eta * eta * curve.area;
            double perr = 0.0;
            for (int l = 0; l < 2; ++l) {
                DensityField el = constant_density(pan, Eigen::Vector2d::Unit(l));
                DensityField r = keta.apply(el);
                for (int i = 0; i < pan->n_nodes; ++i) {
                    Eigen::Vector2d v = r.at(i) - 0.5 * el.at(i) -
                                        expect * Eigen::Vector2d::Unit(l);
                    perr = std::max(perr, v.lpNorm<Eigen::Infinity>());
                }
            }
            out.add({out.name, holespec, NAN, eta, "K_eta_const_identity_inf", perr, 1e-7,
                     perr <= 1e-7, sw2.ms()});
        }
    }
    return out;
}

// criterion 2: jump relations for five trigonometric densities
inline StudyOutcome jump_relations(const StudyConfig& cfg) {
    StudyOutcome out;
    out.name = "jump_relations";
    LameParams p = cfg.params();
    auto pan = std::make_shared<Panelization>(panelize(parse_curve(cfg.hole), cfg.nodes));
    std::mt19937 rng(cfg.seed);
    int pinned_sign = 0;
    for (int t = 0; t < 5; ++t) {
        detail::Stopwatch sw;
        DensityField phi = detail::trig_density(pan, rng);
        JumpReport rep = verify_jumps(pan, phi, p, std::max(1, cfg.nodes / 8));
        std::string pt = "density" + std::to_string(t);
        out.add({out.name, pt, NAN, NAN, "single_layer_continuity", rep.single_continuity, 1e-6,
                 rep.single_continuity <= 1e-6, sw.ms()});
        out.add({out.name, pt, NAN, NAN, "conormal_jump_minus_phi", rep.conormal_jump, 1e-6,
                 rep.conormal_jump <= 1e-6, 0.0});
        out.add({out.name, pt, NAN, NAN, "conormal_vs_operator", rep.conormal_vs_operator, 1e-6,
                 rep.conormal_vs_operator <= 1e-6, 0.0});
        out.add({out.name, pt, NAN, NAN, "double_layer_jump", rep.double_jump, 1e-6,
                 rep.double_jump <= 1e-6, 0.0});
        if (t == 0) pinned_sign = rep.double_jump_sign;
        out.add({out.name, pt, NAN, NAN, "double_jump_sign", double(rep.double_jump_sign), 0.0,
                 rep.double_jump_sign == pinned_sign, 0.0});
    }
    return out;
}

// criterion 3: A_T suite
inline StudyOutcome at_matrix(const StudyConfig& cfg) {
    StudyOutcome out;
    out.name = "at_matrix";
    LameParams p = cfg.params();
    detail::Stopwatch sw;
    auto pan = std::make_shared<Panelization>(panelize(parse_curve(cfg.hole), cfg.nodes));
    KernelBasis kb = kernel_basis(pan, p);
    double sym = (kb.a_matrix - kb.a_matrix.transpose()).cwiseAbs().maxCoeff();
    out.add({out.name, cfg.hole, NAN, NAN, "at_symmetry", sym, 1e-8, sym <= 1e-8, sw.ms()});
    out.add({out.name, cfg.hole, NAN, NAN, "kernel_sv", kb.sv_kernel, 1e-8, kb.sv_kernel <= 1e-8,
             0.0});
    out.add({out.name, cfg.hole, NAN, NAN, "sv_gap", kb.sv_gap, 1e-3, kb.sv_gap >= 1e-3, 0.0});
    out.add({out.name, cfg.hole, NAN, NAN, "constancy_residual", kb.constancy_residual, 1e-8,
             kb.constancy_residual <= 1e-8, 0.0});

    // scaling law on circle pairs: A_{rT} - A_T = (c1/2pi) log(1/r) I
    Curve base = make_curve(CurveKind::circle, {0.25});
    auto pan0 = std::make_shared<Panelization>(panelize(base, cfg.nodes));
    Eigen::Matrix2d a0 = kernel_basis(pan0, p).a_matrix;
    for (double r : {0.5, std::exp(1.0), 2.0}) {
        detail::Stopwatch sw2;
        auto panr = std::make_shared<Panelization>(
            panelize(make_curve(CurveKind::circle, {0.25 * r}, false), cfg.nodes));
        Eigen::Matrix2d ar = kernel_basis(panr, p).a_matrix;
        Eigen::Matrix2d shift =
            (p.c1 / (2.0 * M_PI)) * std::log(1.0 / r) * Eigen::Matrix2d::Identity();
        double err = (ar - a0 - shift).cwiseAbs().maxCoeff();
        std::ostringstream pt;
        pt << "scale_r=" << r;
        out.add({out.name, pt.str(), NAN, NAN, "scaling_law_err", err, 1e-6, err <= 1e-6, sw2.ms()});
    }
    // refinement stability 256 -> 512
    detail::Stopwatch sw3;
    auto pan2 = std::make_shared<Panelization>(panelize(parse_curve(cfg.hole), 2 * cfg.nodes));
    Eigen::Matrix2d a2 = kernel_basis(pan2, p).a_matrix;
    double drift = (kb.a_matrix - a2).cwiseAbs().maxCoeff();
    out.add({out.name, cfg.hole, NAN, NAN, "refinement_drift", drift, 1e-6, drift <= 1e-6,
             sw3.ms()});
    return out;
}

// criterion 4: dilute cell limit; the L2 exponent clause is reported exactly
// as specified and fails (the true decay is |log eta|^{-1}; the paper's
// |log eta|^{-1/2} is a one-sided bound, checked separately and satisfied)
inline StudyOutcome cell_limit(const StudyConfig& cfg) {
    StudyOutcome out;
    out.name = "cell_limit";
    LameParams p = cfg.params();
    auto pg = cfg.make_green();
    detail::Stopwatch sw;
    RateReport rep = average_limit_check(parse_curve(cfg.hole), p, cfg.eta_list, cfg.nodes,
                                         cfg.cell_grid, pg);
    for (size_t i = 0; i < rep.etas.size(); ++i) {
        out.add({out.name, "avg", NAN, rep.etas[i], "avg_err", rep.avg_err[i], 0.0, true, 0.0});
        out.add({out.name, "l2", NAN, rep.etas[i], "l2_err", rep.l2_err[i], 0.0, true, 0.0});
    }
    bool avg_ok = std::abs(rep.avg_fit.exponent - 1.0) <= 0.25 && rep.avg_fit.r_squared >= 0.98;
    out.add({out.name, "fit", NAN, NAN, "avg_exponent", rep.avg_fit.exponent, 0.25, avg_ok,
             sw.ms()});
    out.add({out.name, "fit", NAN, NAN, "avg_r2", rep.avg_fit.r_squared, 0.98,
             rep.avg_fit.r_squared >= 0.98, 0.0});
    bool l2_ok = std::abs(rep.l2_fit.exponent - 0.5) <= 0.15;
    out.add({out.name, "fit", NAN, NAN, "l2_exponent_spec_window", rep.l2_fit.exponent, 0.15,
             l2_ok, 0.0});
    // the paper's one-sided bound: err * |log eta|^{1/2} must not grow
    bool bound_ok = true;
    double prev = 1e300;
    for (size_t i = 0; i < rep.etas.size(); ++i) {
        double scaled = rep.l2_err[i] * std::sqrt(std::abs(std::log(rep.etas[i])));
        bound_ok = bound_ok && scaled <= prev * 1.02;
        prev = scaled;
    }
    out.add({out.name, "fit", NAN, NAN, "l2_paper_upper_bound", prev, 0.0, bound_ok, 0.0});
    // the limit constant for lambda = mu = 1
    double climit = p.c1 / (2.0 * M_PI);
    out.add({out.name, "fit", NAN, NAN, "limit_constant", climit, 1e-6,
             std::abs(climit - 0.106103) <= 1e-6 || std::abs(cfg.lambda - 1.0) > 1e-12, 0.0});
    return out;
}

// criterion 5: oracle structural suite
inline StudyOutcome oracle_structural(const StudyConfig& cfg) {
    StudyOutcome out;
    out.name = "oracle_structural";
    LameParams p = cfg.params();
    Curve curve = parse_curve(cfg.hole);
    auto pg = cfg.make_green();

    // energy identity and Poincare stability over the (eps, eta) grid
    std::vector<double> poincare;
    for (double eps : {0.25, 0.125})
        for (double eta : {0.2, 0.25}) {
            detail::Stopwatch sw;
            PerforationSpec perf = build_perforation(eps, eta, curve);
            int grid = std::max(cfg.grid, int(std::ceil(8.0 / (eps * eta))));
            FdReport rep;
            GridField u = solve_perforated(perf, detail::study_forcing, p, grid, &rep);
            std::ostringstream pt;
            pt << "eps=" << eps << ",eta=" << eta;
            out.add({out.name, pt.str(), eps, eta, "energy_identity_rel", rep.energy_residual,
                     1e-6, rep.energy_residual <= 1e-6, sw.ms()});
            double ratio = u.l2_norm() / (sigma(eps, eta, 2) * u.h1_seminorm(false));
            poincare.push_back(ratio);
            out.add({out.name, pt.str(), eps, eta, "poincare_ratio", ratio, 0.0, true, 0.0});
        }
    double pmax = *std::max_element(poincare.begin(), poincare.end());
    double pmin = *std::min_element(poincare.begin(), poincare.end());
    out.add({out.name, "sweep", NAN, NAN, "poincare_stability", pmax / pmin, 2.0,
             pmax / pmin <= 2.0, 0.0});

    // oscillating-test identity at the criterion point, decreasing under refinement
    double eps = 0.125, eta = 0.25;
    auto cs = std::make_shared<CellSolution>(solve_cell(curve, eta, p, std::min(cfg.nodes, 128), pg));
    PerforationSpec perf = build_perforation(eps, eta, curve);
    double prev = 1e300;
    for (int grid : {256, 512}) {
        detail::Stopwatch sw;
        OscillatingGridFields osc(OscillatingField(cs, eps), grid, true);
        GridField u = solve_perforated(perf, detail::study_forcing, p, grid);
        OscTestReport rep = oscillating_test_identity(u, osc, 0, detail::study_forcing,
                                                      detail::study_bump, sigma(eps, eta, 2), p);
        std::ostringstream pt;
        pt << "grid=" << grid;
        bool ok = (grid < 512) ? true : (rep.residual <= 1e-3 && rep.residual < prev);
        out.add({out.name, pt.str(), eps, eta, "osc_identity_residual", rep.residual, 1e-3, ok,
                 sw.ms()});
        out.add({out.name, pt.str(), eps, eta, "fd_vs_bie_cell_sup", osc.fd_vs_bie_sup, 0.0, true,
                 0.0});
        prev = rep.residual;
    }
    return out;
}

// criterion 6 (slow): homogenization rate suite
inline StudyOutcome homogenization_rates(const StudyConfig& cfg) {
    StudyOutcome out;
    out.name = "homogenization_rates";
    LameParams p = cfg.params();
    Curve curve = parse_curve(cfg.hole);
    auto pg = cfg.make_green();
    std::vector<double> eps_list = cfg.epsilon_list;

    // --- sub-critical surrogate: eta = exp(-eps^{-9/4}), sigma^2 = eps^{-1/4} ---
    // Holes sit far below any grid; the masked oracle degenerates (correctly,
    // at O(sigma^{-2}) accuracy) to the unperturbed solve, and zeta isolates
    // the corrector deviation (M u)^k (v_k - M^{-1} e_k).
    {
        EtaLaw law = EtaLaw::parse("subexp:0.25");
        Eigen::Matrix2d m = effective_matrix(Regime::sub_critical, p, nullptr, cfg.cell_grid,
                                             cfg.mconv()).m;
        GridField u_eff = solve_effective(Regime::sub_critical, m, 0.0, detail::study_forcing, p,
                                          cfg.grid);
        double prev_h1 = 1e300, r0 = 0.0;
        bool decreasing = true, trend = true;
        for (double eps : eps_list) {
            detail::Stopwatch sw;
            double eta = law.eval(eps);
            double sig = sigma(eps, eta, 2);
            CellSolution cs = solve_cell(curve, eta, p, std::min(cfg.nodes, 128), pg);
            auto csp = std::make_shared<CellSolution>(std::move(cs));
            OscillatingGridFields osc(OscillatingField(csp, eps), cfg.grid);
            PerforationSpec perf = build_perforation(eps, eta, curve);
            FdOptions opt;
            opt.allow_subresolution = true;
            GridField u_perf = solve_perforated(perf, detail::study_forcing, p, cfg.grid, nullptr,
                                                opt);
            DiscrepancyField d = discrepancy(Regime::sub_critical, u_perf, u_eff, osc, m, sig);
            double h1 = std::sqrt(d.h1_semi * d.h1_semi + d.l2 * d.l2);
            double bound = 1.0 / (sig * sig) + 1.0 / std::sqrt(std::abs(std::log(eta)));
            double ratio = h1 / bound;
            if (r0 == 0.0) r0 = ratio;
            std::ostringstream pt;
            pt << "sub,eps=" << eps;
            out.add({out.name, pt.str(), eps, eta, "zeta_h1", h1, 0.0, true, sw.ms()});
            out.add({out.name, pt.str(), eps, eta, "zeta_over_bound", ratio, 0.3,
                     ratio / r0 <= 1.3 && ratio / r0 >= 0.7, 0.0});
            decreasing = decreasing && (h1 < prev_h1);
            trend = trend && (ratio / r0 <= 1.3 && ratio / r0 >= 0.7);
            prev_h1 = h1;
        }
        out.add({out.name, "sub", NAN, NAN, "zeta_h1_decreasing", decreasing ? 1.0 : 0.0, 1.0,
                 decreasing, 0.0});
        out.add({out.name, "sub", NAN, NAN, "zeta_trend_within_30pct", trend ? 1.0 : 0.0, 1.0,
                 trend, 0.0});
    }

    // --- super-critical: eta fixed 0.25, classical M from the cell average ---
    {
        double eta = 0.25;
        auto cs = std::make_shared<CellSolution>(solve_cell(curve, eta, p, cfg.nodes, pg));
        Eigen::Matrix2d m = effective_matrix(Regime::classical, p, cs.get(), cfg.cell_grid).m;
        out.add({out.name, "super", NAN, eta, "classical_M_00", m(0, 0), 0.0, true, 0.0});
        Eigen::Matrix2d minv = m.inverse();
        double prev_h1 = 1e300, prev_metric = 1e300;
        bool h1_dec = true, metric_dec = true;
        for (double eps : eps_list) {
            detail::Stopwatch sw;
            double sig = sigma(eps, eta, 2);
            int grid = std::max(cfg.grid, int(std::ceil(8.0 / (eps * eta))));
            PerforationSpec perf = build_perforation(eps, eta, curve);
            GridField u_perf = solve_perforated(perf, detail::study_forcing, p, grid);
            OscillatingGridFields osc(OscillatingField(cs, eps), grid);
            GridField coeff(grid);
            coeff.fill(detail::study_forcing, false);
            DiscrepancyField d =
                discrepancy(Regime::super_critical, u_perf, coeff, osc, m, sig);
            double h1 = std::sqrt(d.h1_semi * d.h1_semi + d.l2 * d.l2);
            GridField u_scaled = u_perf;
            u_scaled *= 1.0 / (sig * sig);
            GridField u_lim(grid);
            u_lim.fill([&](const Eigen::Vector2d& x) {
                return Eigen::Vector2d(minv * detail::study_forcing(x));
            }, false);
            double metric = weak_limit_metric(u_scaled, u_lim, 2.0 * eps, eps);
            std::ostringstream pt;
            pt << "super,eps=" << eps;
            out.add({out.name, pt.str(), eps, eta, "zeta_super_h1", h1, 0.0, true, sw.ms()});
            out.add({out.name, pt.str(), eps, eta, "weak_limit_metric", metric, 0.0, true, 0.0});
            h1_dec = h1_dec && (h1 < prev_h1);
            metric_dec = metric_dec && (metric < prev_metric);
            prev_h1 = h1;
            prev_metric = metric;
        }
        out.add({out.name, "super", NAN, eta, "zeta_super_h1_decreasing", h1_dec ? 1.0 : 0.0, 1.0,
                 h1_dec, 0.0});
        out.add({out.name, "super", NAN, eta, "weak_limit_metric_decreasing",
                 metric_dec ? 1.0 : 0.0, 1.0, metric_dec, 0.0});
    }
    return out;
}

// criterion 7: determinism of the study pipeline
inline StudyOutcome determinism(const StudyConfig& cfg) {
    StudyOutcome out;
    out.name = "determinism";
    StudyConfig mini = cfg;
    mini.nodes = 128;
    mini.name = "kernel_identity";
    auto run_once = [&] {
        StudyOutcome o = kernel_identity(mini);
        StudyOutcome j = jump_relations(mini);
        o.absorb(j);
        return o;
    };
    detail::Stopwatch sw;
    StudyOutcome a = run_once();
    StudyOutcome b = run_once();
    double worst = 0.0;
    bool ok = a.records.size() == b.records.size();
    if (ok)
        for (size_t i = 0; i < a.records.size(); ++i) {
            ok = ok && a.records[i].quantity == b.records[i].quantity;
            worst = std::max(worst, std::abs(a.records[i].value - b.records[i].value));
        }
    out.add({out.name, "rerun", NAN, NAN, "max_record_drift", worst, 1e-10,
             ok && worst <= 1e-10, sw.ms()});
    return out;
}

}  // namespace studies

inline StudyOutcome run_study(const StudyConfig& cfg) {
    StudyOutcome out;
    auto dispatch = [&](const std::string& name) -> StudyOutcome {
        if (name == "kernel_identity") return studies::kernel_identity(cfg);
        if (name == "jump_relations") return studies::jump_relations(cfg);
        if (name == "at_matrix") return studies::at_matrix(cfg);
        if (name == "cell_limit") return studies::cell_limit(cfg);
        if (name == "oracle_structural") return studies::oracle_structural(cfg);
        if (name == "homogenization_rates") return studies::homogenization_rates(cfg);
        if (name == "determinism") return studies::determinism(cfg);
        throw std::invalid_argument("run_study: unknown study '" + name + "'");
    };
    if (cfg.name == "all") {
        out.name = "all";
        std::vector<std::string> names = {"kernel_identity", "jump_relations", "at_matrix",
                                          "cell_limit", "oracle_structural", "determinism"};
        std::vector<std::function<std::vector<StudyRecord>()>> points;
        std::vector<StudyOutcome> parts(names.size());
        for (size_t i = 0; i < names.size(); ++i)
            points.push_back([&, i] {
                parts[i] = dispatch(names[i]);
                return parts[i].records;
            });
        out.records = detail::run_points(points, cfg.workers);
        for (const auto& part : parts) out.pass = out.pass && part.pass;
    } else {
        out = dispatch(cfg.name);
    }
    if (!cfg.out_dir.empty()) {
        std::filesystem::create_directories(cfg.out_dir);
        write_records_csv(out.records, cfg.out_dir + "/" + out.name + ".csv");
        nlohmann::json side;
        side["config"] = cfg.to_config().serialize();
        side["compiler"] = __VERSION__;
        side["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." +
                        std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION);
        side["pass"] = out.pass;
        std::ofstream(cfg.out_dir + "/" + out.name + ".json") << side.dump(2) << "\n";
    }
    return out;
}

}  // namespace perfhom

#endif
