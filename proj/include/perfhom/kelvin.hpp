#ifndef PERFHOM_KELVIN_HPP
#define PERFHOM_KELVIN_HPP

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <stdexcept>

#include "perfhom/lame.hpp"

namespace perfhom {

// Kelvin fundamental solution of mu*Lap + (lambda+mu)*grad div, columns Gamma_k.
//   d = 2:  Gamma^j_k(x) = (c1/2pi) log|x| d_jk - (c2/2pi) x^j x^k / |x|^2
//   d = 3:  Gamma^j_k(x) = -(c1/4pi) d_jk / |x| - (c2/4pi) x^j x^k / |x|^3
// The matrix is symmetric and even in x.
inline Eigen::Matrix2d kelvin2(const Eigen::Vector2d& x, const LameParams& p) {
    double rho = x.squaredNorm();
    if (rho == 0.0) throw std::domain_error("kelvin: singular point x = 0");
    Eigen::Matrix2d g = (p.c1 / (2.0 * M_PI)) * 0.5 * std::log(rho) * Eigen::Matrix2d::Identity();
    g -= (p.c2 / (2.0 * M_PI)) / rho * (x * x.transpose());
    return g;
}

inline Eigen::Matrix3d kelvin3(const Eigen::Vector3d& x, const LameParams& p) {
    double r = x.norm();
    if (r == 0.0) throw std::domain_error("kelvin: singular point x = 0");
    Eigen::Matrix3d g = -(p.c1 / (4.0 * M_PI)) / r * Eigen::Matrix3d::Identity();
    g -= (p.c2 / (4.0 * M_PI)) / (r * r * r) * (x * x.transpose());
    return g;
}

inline Eigen::MatrixXd kelvin(const Eigen::VectorXd& x, const LameParams& p) {
    if (x.size() == 2 && p.dim == 2) return kelvin2(Eigen::Vector2d(x), p);
    if (x.size() == 3 && p.dim == 3) return kelvin3(Eigen::Vector3d(x), p);
    throw std::invalid_argument("kelvin: point dimension must match params.dim in {2,3}");
}

// grad[i](j,k) = d_i Gamma^j_k; valid for d in {2,3} via the common closed form
//   d_i Gamma^j_k = (c1/w_d) x_i d_jk / |x|^d
//                 - (c2/w_d) [ (d_ij x_k + d_ik x_j)/|x|^d - d x_i x_j x_k / |x|^{d+2} ]
template <int D>
inline std::array<Eigen::Matrix<double, D, D>, D> kelvin_gradient_fixed(
    const Eigen::Matrix<double, D, 1>& x, const LameParams& p) {
    double rho = x.squaredNorm();
    if (rho == 0.0) throw std::domain_error("kelvin_gradient: singular point x = 0");
    double rd = std::pow(rho, 0.5 * D);  // |x|^d
    double inv_rd = 1.0 / rd;
    double inv_rd2 = inv_rd / rho;  // 1/|x|^{d+2}
    const double a = p.c1 / p.omega_d, b = p.c2 / p.omega_d;
    std::array<Eigen::Matrix<double, D, D>, D> g;
    for (int i = 0; i < D; ++i) {
        Eigen::Matrix<double, D, D> m = a * x[i] * inv_rd * Eigen::Matrix<double, D, D>::Identity();
        for (int j = 0; j < D; ++j)
            for (int k = 0; k < D; ++k) {
                double t = (i == j ? x[k] : 0.0) + (i == k ? x[j] : 0.0);
                m(j, k) -= b * (t * inv_rd - double(D) * x[i] * x[j] * x[k] * inv_rd2);
            }
        g[i] = m;
    }
    return g;
}

inline std::array<Eigen::Matrix2d, 2> kelvin_gradient2(const Eigen::Vector2d& x,
                                                       const LameParams& p) {
    return kelvin_gradient_fixed<2>(x, p);
}
inline std::array<Eigen::Matrix3d, 3> kelvin_gradient3(const Eigen::Vector3d& x,
                                                       const LameParams& p) {
    return kelvin_gradient_fixed<3>(x, p);
}

// div Gamma_k = (c1 - c2)/w_d * x_k/|x|^d, the k-th component of the returned vector.
inline Eigen::Vector2d kelvin_divergence2(const Eigen::Vector2d& x, const LameParams& p) {
    double rho = x.squaredNorm();
    if (rho == 0.0) throw std::domain_error("kelvin_divergence: singular point x = 0");
    return ((p.c1 - p.c2) / p.omega_d / rho) * x;
}

// Conormal kernel of the double-layer potential, 2D. Returns the matrix with
// entries K_{ik}(x;y) (row i = density component, column k = output component):
//   K_ik = -(mu c1/w) <N_y, r> d_ik / |r|^2
//        - (2 mu c2/w) <N_y, r> r_i r_k / |r|^4
//        + (mu c2/w) (r_i N_y^k - r_k N_y^i) / |r|^2,         r = x - y.
inline Eigen::Matrix2d conormal_kernel(const Eigen::Vector2d& x, const Eigen::Vector2d& y,
                                       const Eigen::Vector2d& ny, const LameParams& p) {
    Eigen::Vector2d r = x - y;
    double rho = r.squaredNorm();
    if (rho == 0.0) throw std::domain_error("conormal_kernel: coincident points");
    const double w = p.omega_d;
    double nr = ny.dot(r);
    Eigen::Matrix2d k = -(p.mu * p.c1 / w) * (nr / rho) * Eigen::Matrix2d::Identity();
    k -= (2.0 * p.mu * p.c2 / w) * (nr / (rho * rho)) * (r * r.transpose());
    k += (p.mu * p.c2 / w) / rho * (r * ny.transpose() - ny * r.transpose());
    return k;
}

// Weakly singular part (first two terms) and Cauchy part (third term) exposed
// separately; the Nystrom assembly integrates them with different rules.
inline Eigen::Matrix2d conormal_kernel_weak(const Eigen::Vector2d& x, const Eigen::Vector2d& y,
                                            const Eigen::Vector2d& ny, const LameParams& p) {
    Eigen::Vector2d r = x - y;
    double rho = r.squaredNorm();
    const double w = p.omega_d;
    double nr = ny.dot(r);
    Eigen::Matrix2d k = -(p.mu * p.c1 / w) * (nr / rho) * Eigen::Matrix2d::Identity();
    k -= (2.0 * p.mu * p.c2 / w) * (nr / (rho * rho)) * (r * r.transpose());
    return k;
}

// Diagonal limit of the weakly singular part; gamma = <N,x''>/(2|x'|^2) at the node.
inline Eigen::Matrix2d conormal_kernel_weak_diag(const Eigen::Vector2d& tangent, double gamma,
                                                 const LameParams& p) {
    const double w = p.omega_d;
    Eigen::Matrix2d k = -(p.mu * p.c1 / w) * gamma * Eigen::Matrix2d::Identity();
    k -= (2.0 * p.mu * p.c2 / w) * gamma * (tangent * tangent.transpose());
    return k;
}

inline Eigen::Matrix2d conormal_kernel_cauchy(const Eigen::Vector2d& x, const Eigen::Vector2d& y,
                                              const Eigen::Vector2d& ny, const LameParams& p) {
    Eigen::Vector2d r = x - y;
    double rho = r.squaredNorm();
    return (p.mu * p.c2 / p.omega_d) / rho * (r * ny.transpose() - ny * r.transpose());
}

// Adjoint kernel K*_{ik}(x;y) = K_{ki}(y;x); N_x is the normal at the target.
inline Eigen::Matrix2d conormal_kernel_adj(const Eigen::Vector2d& x, const Eigen::Vector2d& y,
                                           const Eigen::Vector2d& nx, const LameParams& p) {
    return conormal_kernel(y, x, nx, p).transpose();
}

// The compact difference K* - K, integrable on C^{1,alpha} boundaries:
//   (mu c1/w) <r, N_x + N_y> d_ik / |r|^2
// + (2 mu c2/w) r_i r_k <r, N_x + N_y> / |r|^4
// + (mu c2/w) [ r_i (N_x - N_y)^k - r_k (N_x - N_y)^i ] / |r|^2.
inline Eigen::Matrix2d kernel_difference(const Eigen::Vector2d& x, const Eigen::Vector2d& y,
                                         const Eigen::Vector2d& nx, const Eigen::Vector2d& ny,
                                         const LameParams& p) {
    Eigen::Vector2d r = x - y;
    double rho = r.squaredNorm();
    if (rho == 0.0) throw std::domain_error("kernel_difference: coincident points");
    const double w = p.omega_d;
    Eigen::Vector2d ns = nx + ny, nd = nx - ny;
    double nr = ns.dot(r);
    Eigen::Matrix2d k = (p.mu * p.c1 / w) * (nr / rho) * Eigen::Matrix2d::Identity();
    k += (2.0 * p.mu * p.c2 / w) * (nr / (rho * rho)) * (r * r.transpose());
    k += (p.mu * p.c2 / w) / rho * (r * nd.transpose() - nd * r.transpose());
    return k;
}

}  // namespace perfhom

#endif
