#ifndef PERFHOM_PERIODIC_SOLVE_HPP
#define PERFHOM_PERIODIC_SOLVE_HPP

#include <Eigen/Dense>
#include <memory>
#include <stdexcept>

#include "perfhom/boundary_operator.hpp"
#include "perfhom/density.hpp"

namespace perfhom {

struct PeriodicSolveReport {
    double residual_inf = 0.0;
    double cond_estimate = 0.0;
};

// Solve (-1/2 I + K^eta_T)[g] = h by dense LU. The operator is a bijection on
// L^2(dT) for eta in the perturbation regime, so this should stay well
// conditioned; a blow-up is reported instead of silently returned.
inline DensityField solve_periodic_dirichlet(const BoundaryOperator& k_eta, const DensityField& h,
                                             PeriodicSolveReport* report = nullptr,
                                             double residual_tol = 1e-9,
                                             double cond_max = 1e10) {
    if (k_eta.label != OperatorLabel::K_eta)
        throw std::invalid_argument("solve_periodic_dirichlet: needs a K_eta operator");
    const int m = int(k_eta.matrix.rows());
    Eigen::MatrixXd a = k_eta.matrix - 0.5 * Eigen::MatrixXd::Identity(m, m);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
    Eigen::VectorXd g = lu.solve(h.values);
    // one step of iterative refinement keeps the residual near round-off
    g += lu.solve(h.values - a * g);
    double hn = h.values.lpNorm<Eigen::Infinity>();
    double res = (a * g - h.values).lpNorm<Eigen::Infinity>();
    if (hn > 0.0 && res > residual_tol * hn)
        throw std::runtime_error("solve_periodic_dirichlet: residual above tolerance");
    if (report) {
        report->residual_inf = res;
        // cheap condition estimate: ||A||_1 * ||A^{-1} e||_1 over a few probes
        double anorm = a.cwiseAbs().colwise().sum().maxCoeff();
        double ainv = 0.0;
        for (int t = 0; t < 3; ++t) {
            Eigen::VectorXd e = Eigen::VectorXd::Zero(m);
            e[(t * m) / 3] = 1.0;
            ainv = std::max(ainv, lu.solve(e).lpNorm<1>());
        }
        report->cond_estimate = anorm * ainv;
        if (report->cond_estimate > cond_max)
            throw std::runtime_error("solve_periodic_dirichlet: near-degenerate system");
    }
    return DensityField(h.pan, std::move(g));
}

}  // namespace perfhom

#endif
