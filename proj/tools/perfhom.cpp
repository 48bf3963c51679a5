// perfhom - batch driver for the elastostatic layer-potential library:
// invariant suites, kernel-basis and cell diagnostics, the finite-difference
// oracle, and the config-driven rate studies.

#include <CLI11.hpp>
#include <iostream>

#include "perfhom/perfhom.hpp"

using namespace perfhom;

namespace {

int print_outcome(const StudyOutcome& out) {
    for (const auto& r : out.records) {
        std::cout << (r.pass ? "  pass  " : "  FAIL  ") << r.study << "/" << r.point << "  "
                  << r.quantity << " = " << r.value;
        if (r.tolerance != 0.0) std::cout << "  (tol " << r.tolerance << ")";
        std::cout << "\n";
    }
    std::cout << (out.pass ? "OK" : "FAILED") << ": study " << out.name << ", "
              << out.records.size() << " records\n";
    return out.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"elastostatic layer potentials and periodic homogenization in perforated domains"};
    app.require_subcommand(1);

    // ---- verify ----
    auto* verify = app.add_subcommand("verify", "run the invariant suites");
    std::string v_hole = "circle:0.25";
    int v_nodes = 256;
    bool v_full = false;
    verify->add_option("--hole", v_hole, "hole spec: circle:r | ellipse:a,b | kite:default");
    verify->add_option("--nodes", v_nodes, "boundary nodes (even, >= 32)");
    verify->add_flag("--full", v_full, "include the cell-limit and oracle suites");

    // ---- kernel-basis ----
    auto* kbcmd = app.add_subcommand("kernel-basis", "kernel densities phi* and the matrix A_T");
    std::string k_hole = "circle:0.25";
    double k_lambda = 1.0, k_mu = 1.0;
    int k_nodes = 256;
    std::string k_export;
    kbcmd->add_option("--hole", k_hole, "hole spec");
    kbcmd->add_option("--lambda", k_lambda, "Lame lambda");
    kbcmd->add_option("--mu", k_mu, "Lame mu");
    kbcmd->add_option("--nodes", k_nodes, "boundary nodes");
    kbcmd->add_option("--export-operators", k_export, "directory for flat binary operator dumps");

    // ---- cell ----
    auto* cellcmd = app.add_subcommand("cell", "solve the rescaled cell problem");
    std::string c_hole = "circle:0.25";
    double c_eta = 0.1, c_lambda = 1.0, c_mu = 1.0;
    int c_nodes = 256, c_grid = 256;
    cellcmd->add_option("--eta", c_eta, "hole-cell ratio")->required();
    cellcmd->add_option("--hole", c_hole, "hole spec");
    cellcmd->add_option("--lambda", c_lambda, "Lame lambda");
    cellcmd->add_option("--mu", c_mu, "Lame mu");
    cellcmd->add_option("--nodes", c_nodes, "boundary nodes");
    cellcmd->add_option("--grid", c_grid, "cell quadrature grid");

    // ---- oracle ----
    auto* orcmd = app.add_subcommand("oracle", "direct perforated finite-difference solve");
    double o_eps = 0.125, o_eta = 0.25, o_lambda = 1.0, o_mu = 1.0;
    int o_grid = 512;
    std::string o_hole = "circle:0.25", o_export;
    orcmd->add_option("--epsilon", o_eps, "cell size")->required();
    orcmd->add_option("--eta", o_eta, "hole-cell ratio")->required();
    orcmd->add_option("--grid", o_grid, "grid cells per side")->required();
    orcmd->add_option("--hole", o_hole, "hole spec");
    orcmd->add_option("--lambda", o_lambda, "Lame lambda");
    orcmd->add_option("--mu", o_mu, "Lame mu");
    orcmd->add_option("--export", o_export, "path for the flat binary field dump");

    // ---- study ----
    auto* stcmd = app.add_subcommand("study", "config-driven study runner");
    std::string s_config;
    stcmd->add_option("--config", s_config, "flat key-value config file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*verify) {
            StudyConfig cfg;
            cfg.hole = v_hole;
            cfg.nodes = v_nodes;
            StudyOutcome out;
            out.name = "verify";
            out.absorb(studies::kernel_identity(cfg));
            out.absorb(studies::jump_relations(cfg));
            out.absorb(studies::at_matrix(cfg));
            if (v_full) {
                out.absorb(studies::cell_limit(cfg));
                out.absorb(studies::oracle_structural(cfg));
            }
            return print_outcome(out);
        }
        if (*kbcmd) {
            LameParams p(k_lambda, k_mu, 2);
            auto pan = std::make_shared<Panelization>(panelize(parse_curve(k_hole), k_nodes));
            KernelBasis kb = kernel_basis(pan, p);
            std::cout << "hole " << k_hole << ", n = " << k_nodes << "\n";
            std::cout << "A_T =\n" << kb.a_matrix << "\n";
            std::cout << "det A_T = " << kb.a_matrix.determinant() << "\n";
            std::cout << "kernel singular value = " << kb.sv_kernel << ", gap = " << kb.sv_gap
                      << "\n";
            std::cout << "constancy residual = " << kb.constancy_residual << "\n";
            if (!k_export.empty()) {
                std::filesystem::create_directories(k_export);
                for (auto label : {OperatorLabel::S, OperatorLabel::K, OperatorLabel::Kstar}) {
                    auto op = assemble(pan, label, p);
                    std::string name = label == OperatorLabel::S ? "S"
                                       : label == OperatorLabel::K ? "K" : "Kstar";
                    export_operator(op, k_export + "/" + name + ".bin");
                }
                std::cout << "operators written to " << k_export << "\n";
            }
            return 0;
        }
        if (*cellcmd) {
            LameParams p(c_lambda, c_mu, 2);
            Curve curve = parse_curve(c_hole);
            CellSolution cs = solve_cell(curve, c_eta, p, c_nodes);
            std::cout << "eta = " << c_eta << ", hole " << c_hole << ", n = " << c_nodes << "\n";
            std::cout << "c_eta: (" << cs.c_eta[0].transpose() << "), (" << cs.c_eta[1].transpose()
                      << ")\n";
            std::cout << "eta*<g> = " << (c_eta * cs.g_mean[0]).transpose() << "\n";
            std::cout << "||g'||_L2 = " << cs.gprime_l2 << "\n";
            std::cout << "Pi0 balance residual = " << std::max(cs.balance_residual[0],
                                                               cs.balance_residual[1]) << "\n";
            std::cout << "boundary trace residual = " << cs.boundary_trace_residual() << "\n";
            double limit = p.c1 / (2.0 * M_PI);
            CellMetrics cm = cell_metrics(cs, c_grid, &limit);
            double logfac = std::abs(std::log(c_eta));
            double hole_frac = c_eta * c_eta * curve.area;
            std::cout << "<chi> =\n" << cm.chi_avg << "\n";
            std::cout << "<v> - (c1/2pi)e_k: ";
            for (int k = 0; k < 2; ++k)
                std::cout << ((1.0 - hole_frac) * cm.chi_avg.col(k) / logfac -
                              limit * Eigen::Vector2d::Unit(k))
                                 .lpNorm<Eigen::Infinity>()
                          << " ";
            std::cout << "\n||v - (c1/2pi)e_k||_L2: " << cm.v_l2[0] << " " << cm.v_l2[1] << "\n";
            return 0;
        }
        if (*orcmd) {
            LameParams p(o_lambda, o_mu, 2);
            PerforationSpec perf = build_perforation(o_eps, o_eta, parse_curve(o_hole));
            FdReport rep;
            GridField u = solve_perforated(perf, detail::study_forcing, p, o_grid, &rep);
            std::cout << "eps = " << o_eps << ", eta = " << o_eta << ", grid = " << o_grid
                      << ", holes = " << perf.centers.size() << "\n";
            std::cout << "cg iterations = " << rep.iterations
                      << ", rel residual = " << rep.rel_residual << "\n";
            std::cout << "energy identity residual = " << rep.energy_residual << "\n";
            double sig = sigma(o_eps, o_eta, 2);
            std::cout << "sigma = " << sig << ", ||u||_L2 = " << u.l2_norm()
                      << ", |u|_H1 = " << u.h1_seminorm(false) << "\n";
            std::cout << "poincare ratio ||u||/(sigma |u|_H1) = "
                      << u.l2_norm() / (sig * u.h1_seminorm(false)) << "\n";
            if (!o_export.empty()) {
                export_grid(u, o_export);
                std::cout << "field written to " << o_export << "\n";
            }
            return 0;
        }
        if (*stcmd) {
            StudyConfig cfg = StudyConfig::from_config(Config::load(s_config));
            StudyOutcome out = run_study(cfg);
            return print_outcome(out);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
