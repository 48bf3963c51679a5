#ifndef PERFHOM_KERNEL_BASIS_HPP
#define PERFHOM_KERNEL_BASIS_HPP

#include <Eigen/Dense>
#include <memory>
#include <stdexcept>

#include "perfhom/boundary_operator.hpp"
#include "perfhom/density.hpp"
#include "perfhom/layer_potential.hpp"

namespace perfhom {

// Basis phi*_1, phi*_2 of ker(-1/2 I + K*_T), normalized so that the boundary
// moments are int phi*_j = e_j, together with the constant single-layer values
// S_T[phi*_j] = -a*_j and the matrix A_T = [a*_1 a*_2].
struct KernelBasis {
    std::shared_ptr<const Panelization> pan;
    std::array<DensityField, 2> phi_star;
    Eigen::Matrix2d a_matrix;    // A_T
    double constancy_residual = 0.0;
    double sv_kernel = 0.0;      // largest of the two kernel singular values
    double sv_gap = 0.0;         // third-smallest singular value
};

struct KernelBasisOptions {
    double kernel_tol = 1e-8;
    double gap_tol = 1e-3;
    double moment_cond_max = 1e8;
    int probes = 4;
};

inline KernelBasis kernel_basis(std::shared_ptr<const Panelization> pan, const LameParams& prm,
                                const KernelBasisOptions& opt = {}) {
    const int n = pan->n_nodes;
    BoundaryOperator kstar = assemble(pan, OperatorLabel::Kstar, prm);
    Eigen::MatrixXd m = kstar.matrix - 0.5 * Eigen::MatrixXd::Identity(2 * n, 2 * n);

    Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    double s_last = sv[2 * n - 1], s_next = sv[2 * n - 2], s_third = sv[2 * n - 3];
    if (!(s_next <= opt.kernel_tol && s_third >= opt.gap_tol))
        throw std::runtime_error("kernel_basis: kernel dimension != d at this resolution");

    KernelBasis kb;
    kb.pan = pan;
    kb.sv_kernel = s_next;
    kb.sv_gap = s_third;
    (void)s_last;

    DensityField v0(pan, svd.matrixV().col(2 * n - 1));
    DensityField v1(pan, svd.matrixV().col(2 * n - 2));

    // re-combine so the moments hit e_1, e_2
    Eigen::Matrix2d moments;
    moments.col(0) = v0.boundary_integral();
    moments.col(1) = v1.boundary_integral();
    Eigen::JacobiSVD<Eigen::Matrix2d> msvd(moments);
    double cond = msvd.singularValues()(0) / msvd.singularValues()(1);
    if (!(cond < opt.moment_cond_max))
        throw std::runtime_error("kernel_basis: degenerate moment normalization");
    Eigen::Matrix2d coeff = moments.inverse();
    for (int j = 0; j < 2; ++j)
        kb.phi_star[j] =
            DensityField(pan, coeff(0, j) * v0.values + coeff(1, j) * v1.values);

    // read the constant value of S[phi*_j] at interior probes, average over
    // probes to suppress quadrature noise, and record the constancy residual
    BoundaryOperator sop = assemble(pan, OperatorLabel::S, prm);
    double inrad = pan->curve->r1;
    for (int j = 0; j < 2; ++j) {
        EvalGrid g = EvalGrid::build(*pan, kb.phi_star[j]);
        Eigen::Vector2d avg = Eigen::Vector2d::Zero();
        std::vector<Eigen::Vector2d> vals(opt.probes);
        for (int q = 0; q < opt.probes; ++q) {
            double ang = 2.0 * M_PI * q / opt.probes + 0.3;
            Eigen::Vector2d probe = 0.5 * inrad * Eigen::Vector2d(std::cos(ang), std::sin(ang));
            vals[q] = g.single(probe, prm);
            avg += vals[q];
        }
        avg /= double(opt.probes);
        kb.a_matrix.col(j) = -avg;
        double res = 0.0;
        for (auto& v : vals) res = std::max(res, (v - avg).lpNorm<Eigen::Infinity>());
        DensityField strace = sop.apply(kb.phi_star[j]);
        for (int i = 0; i < n; ++i)
            res = std::max(res, (strace.at(i) - avg).lpNorm<Eigen::Infinity>());
        kb.constancy_residual = std::max(kb.constancy_residual, res);
    }
    return kb;
}

// Decomposition phi = Pi0[phi] + Pi1[phi] with Pi0 constant and Pi1 in
// ran(-1/2 I + K_T); (Pi0 phi)^k = <phi*_k, phi>.
struct Decomposition {
    Eigen::Vector2d pi0;
    DensityField pi1;
};

inline Decomposition decompose(const KernelBasis& kb, const DensityField& phi) {
    Decomposition d;
    d.pi0 = {inner(kb.phi_star[0], phi), inner(kb.phi_star[1], phi)};
    d.pi1 = DensityField(phi.pan);
    for (int i = 0; i < phi.n(); ++i) d.pi1.set(i, phi.at(i) - d.pi0);
    return d;
}

}  // namespace perfhom

#endif
