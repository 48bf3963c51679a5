#include <catch2/catch_amalgamated.hpp>

#include "perfhom/fd_solver.hpp"

using namespace perfhom;
using Catch::Approx;

namespace {
const LameParams P(1.0, 1.0, 2);

Eigen::Vector2d f_smooth(const Eigen::Vector2d& x) {
    return {std::sin(M_PI * x.x()) * std::sin(M_PI * x.y()),
            std::sin(2.0 * M_PI * x.x()) * std::sin(M_PI * x.y())};
}

// manufactured displacement and the matching body force f = -L[u]
Eigen::Vector2d u_manufactured(const Eigen::Vector2d& x) {
    double s1 = std::sin(M_PI * x.x()) * std::sin(M_PI * x.y());
    double s2 = std::sin(2.0 * M_PI * x.x()) * std::sin(3.0 * M_PI * x.y());
    return {s1, s2};
}
Eigen::Vector2d f_manufactured(const Eigen::Vector2d& x) {
    const double lam = P.lambda, mu = P.mu;
    double sx = std::sin(M_PI * x.x()), sy = std::sin(M_PI * x.y());
    double cx = std::cos(M_PI * x.x()), cy = std::cos(M_PI * x.y());
    double s2x = std::sin(2.0 * M_PI * x.x()), s3y = std::sin(3.0 * M_PI * x.y());
    double c2x = std::cos(2.0 * M_PI * x.x()), c3y = std::cos(3.0 * M_PI * x.y());
    double pi2 = M_PI * M_PI;
    // u1 = sx sy, u2 = s2x s3y
    double lap1 = -2.0 * pi2 * sx * sy;
    double lap2 = -13.0 * pi2 * s2x * s3y;
    // div u = pi cx sy + 3 pi s2x c3y; grad(div u)
    double ddiv1 = -pi2 * sx * sy + 6.0 * pi2 * c2x * c3y;
    double ddiv2 = pi2 * cx * cy - 9.0 * pi2 * s2x * s3y;
    return {-(mu * lap1 + (lam + mu) * ddiv1), -(mu * lap2 + (lam + mu) * ddiv2)};
}
}  // namespace

TEST_CASE("perforated oracle basics") {
    Curve c = make_curve(CurveKind::circle, {0.25});
    PerforationSpec perf = build_perforation(0.25, 0.25, c);

    SECTION("zero forcing gives the zero field") {
        FdReport rep;
        GridField u = solve_perforated(
            perf, [](const Eigen::Vector2d&) { return Eigen::Vector2d::Zero(); }, P, 128, &rep);
        REQUIRE(u.values.lpNorm<Eigen::Infinity>() == 0.0);
    }
    SECTION("masked nodes stay exactly zero; energy identity holds") {
        FdReport rep;
        GridField u = solve_perforated(perf, f_smooth, P, 128, &rep);
        for (int j = 0; j <= u.n; ++j)
            for (int i = 0; i <= u.n; ++i)
                if (!u.fluid(i, j)) REQUIRE(u.at(i, j).norm() == 0.0);
        REQUIRE(rep.energy_residual <= 1e-6);
        REQUIRE(rep.rel_residual <= 1e-9);
    }
    SECTION("linearity") {
        auto f2 = [](const Eigen::Vector2d& x) {
            return Eigen::Vector2d(x.x() * (1 - x.x()), std::sin(M_PI * x.y()));
        };
        GridField ua = solve_perforated(perf, f_smooth, P, 128);
        GridField ub = solve_perforated(perf, f2, P, 128);
        GridField uab = solve_perforated(
            perf,
            [&](const Eigen::Vector2d& x) { return Eigen::Vector2d(f_smooth(x) + f2(x)); }, P,
            128);
        REQUIRE((uab.values - ua.values - ub.values).lpNorm<Eigen::Infinity>() <= 1e-10);
    }
    SECTION("unresolved holes rejected") {
        REQUIRE_THROWS_AS(solve_perforated(perf, f_smooth, P, 64), std::invalid_argument);
        FdOptions opt;
        opt.allow_subresolution = true;
        REQUIRE_NOTHROW(solve_perforated(perf, f_smooth, P, 64, nullptr, opt));
    }
}

TEST_CASE("a-priori sigma bound and discrete Poincare stability") {
    Curve c = make_curve(CurveKind::circle, {0.25});
    double fl2 = 0.0;
    {
        GridField tmp(64);
        tmp.fill(f_smooth, false);
        fl2 = tmp.l2_norm();
    }
    std::vector<double> cs_apriori, cs_poincare;
    struct Case { double eps, eta; int grid; };
    for (auto [eps, eta, grid] : {Case{0.25, 0.25, 128}, Case{0.125, 0.25, 256},
                                  Case{0.25, 0.2, 160}, Case{0.125, 0.2, 320}}) {
        PerforationSpec perf = build_perforation(eps, eta, c);
        GridField u = solve_perforated(perf, f_smooth, P, grid);
        double s = sigma(eps, eta, 2);
        cs_apriori.push_back(u.l2_norm() / (s * s * fl2));
        cs_poincare.push_back(u.l2_norm() / (s * u.h1_seminorm(false)));
    }
    auto spread = [](const std::vector<double>& v) {
        double lo = *std::min_element(v.begin(), v.end());
        double hi = *std::max_element(v.begin(), v.end());
        return hi / lo;
    };
    INFO("apriori " << cs_apriori[0] << " " << cs_apriori[1] << " " << cs_apriori[2] << " "
                    << cs_apriori[3]);
    INFO("poincare " << cs_poincare[0] << " " << cs_poincare[1] << " " << cs_poincare[2] << " "
                     << cs_poincare[3]);
    REQUIRE(spread(cs_apriori) < 2.0);
    REQUIRE(spread(cs_poincare) < 2.0);
}

TEST_CASE("effective solvers") {
    SECTION("super-critical algebra") {
        Eigen::Matrix2d m = 3.0 * M_PI * Eigen::Matrix2d::Identity();
        GridField u = solve_effective(Regime::super_critical, m, 0.0,
                                      [](const Eigen::Vector2d&) {
                                          return Eigen::Vector2d(1.0, 0.0);
                                      },
                                      P, 64);
        Eigen::Vector2d mid = u.at(32, 32);
        REQUIRE(mid.x() == Approx(1.0 / (3.0 * M_PI)).margin(1e-14));
        REQUIRE(mid.y() == Approx(0.0).margin(1e-14));
    }
    SECTION("manufactured-solution convergence at O(h^2)") {
        std::vector<double> errs;
        for (int n : {32, 64, 128}) {
            GridField u = solve_effective(Regime::sub_critical, Eigen::Matrix2d::Identity(), 0.0,
                                          f_manufactured, P, n);
            double emax = 0.0;
            for (int j = 0; j <= n; ++j)
                for (int i = 0; i <= n; ++i)
                    emax = std::max(emax,
                                    (u.at(i, j) - u_manufactured(u.point(i, j)))
                                        .lpNorm<Eigen::Infinity>());
            errs.push_back(emax);
        }
        REQUIRE(errs[0] / errs[1] == Approx(4.0).epsilon(0.25));
        REQUIRE(errs[1] / errs[2] == Approx(4.0).epsilon(0.25));
    }
    SECTION("critical solve approaches the unperturbed one as M/sigma0^2 -> 0") {
        GridField u0 = solve_effective(Regime::sub_critical, Eigen::Matrix2d::Identity(), 0.0,
                                       f_smooth, P, 64);
        GridField u1 = solve_effective(Regime::critical, 1e-8 * Eigen::Matrix2d::Identity(), 1.0,
                                       f_smooth, P, 64);
        REQUIRE((u1.values - u0.values).lpNorm<Eigen::Infinity>() <= 1e-7);
    }
    SECTION("non-SPD M rejected in the critical regime") {
        Eigen::Matrix2d bad;
        bad << 1.0, 0.0, 0.0, -1.0;
        REQUIRE_THROWS_AS(solve_effective(Regime::critical, bad, 1.0, f_smooth, P, 32),
                          std::invalid_argument);
    }
}

TEST_CASE("grid field exports") {
    GridField g(16);
    g.fill(f_smooth);
    export_grid(g, "/tmp/perfhom_grid_test.bin");
    export_grid_slice_csv(g, 8, "/tmp/perfhom_grid_slice.csv");
    std::ifstream f("/tmp/perfhom_grid_test.bin", std::ios::binary | std::ios::ate);
    REQUIRE(f.good());
    REQUIRE(size_t(f.tellg()) == 4 + 4 + 8 + 17 * 17 + 17 * 17 * 2 * 8);
}
