#ifndef PERFHOM_EWALD_HPP
#define PERFHOM_EWALD_HPP

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "perfhom/kelvin.hpp"
#include "perfhom/lame.hpp"

namespace perfhom {

namespace special {

// Exponential integral E1(z), z > 0. Series below 1, modified Lentz continued
// fraction above.
inline double expint_e1(double z) {
    if (z <= 0.0) throw std::domain_error("expint_e1: requires z > 0");
    const double euler = 0.57721566490153286060651209;
    if (z <= 1.0) {
        double sum = 0.0, term = 1.0;
        for (int n = 1; n <= 40; ++n) {
            term *= -z / n;
            sum += term / n;
            if (std::abs(term / n) < 1e-18) break;
        }
        return -euler - std::log(z) - sum;
    }
    double b = z + 1.0, c = 1e308, d = 1.0 / b, h = d;
    for (int i = 1; i <= 200; ++i) {
        double a = -double(i) * i;
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        double del = c * d;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) break;
    }
    return h * std::exp(-z);
}

// Ein(z) = gamma + log z + E1(z), entire; direct series.
inline double ein(double z) {
    double sum = 0.0, term = 1.0;
    for (int n = 1; n <= 90; ++n) {
        term *= -z / n;
        sum -= term / n;
        if (std::abs(term) < 1e-18 * (1.0 + std::abs(sum))) break;
    }
    return sum;
}

// h(u) = (1 - e^{-u})/u and h'(u), stable through u = 0.
inline double h_ratio(double u) {
    if (std::abs(u) < 1e-2) {
        return 1.0 - u / 2.0 + u * u / 6.0 - u * u * u / 24.0 + u * u * u * u / 120.0;
    }
    return (1.0 - std::exp(-u)) / u;
}
inline double h_ratio_prime(double u) {
    if (std::abs(u) < 1e-2) {
        return -0.5 + u / 3.0 - u * u / 8.0 + u * u * u / 30.0 - u * u * u * u / 144.0;
    }
    return (std::exp(-u) * (1.0 + u) - 1.0) / (u * u);
}

}  // namespace special

struct EwaldParams {
    double split = 4.0;   // real/Fourier split parameter a
    int kmax = 12;        // Fourier truncation |xi|_inf <= kmax
    double accuracy = 1e-8;
};

// Periodic fundamental solution of the 2D Lame system on the unit torus,
//   L[G_k] = (delta_0 - 1) e_k,  with zero mean,
// decomposed as G = Gamma + R with R smooth on the closed cell. Evaluation is
// by Ewald splitting: a Gaussian-damped Fourier sum plus screened lattice
// images over the 3x3 neighbors; the z = 0 image minus Gamma is evaluated by a
// series-stable closed form so that R is smooth through the origin.
class PeriodicGreen {
public:
    PeriodicGreen(const LameParams& params, const EwaldParams& ew = {})
        : p_(params), ew_(ew), beta_((params.lambda + params.mu) / (params.lambda + 2.0 * params.mu)) {
        if (params.dim != 2)
            throw std::invalid_argument("PeriodicGreen: implemented for dim = 2 only");
        if (ew_.split < 3.0 || ew_.split > 6.0)
            throw std::invalid_argument("PeriodicGreen: split parameter outside the 3x3-image regime");
        // truncation check: largest dropped Fourier coefficient and image term
        double qdrop = 2.0 * M_PI * (ew_.kmax + 1);
        double s = 1.0 / (4.0 * ew_.split * ew_.split);
        double fourier_tail = std::exp(-s * qdrop * qdrop) / (p_.mu * qdrop * qdrop) *
                              (1.0 + beta_ * (1.0 + s * qdrop * qdrop));
        double rho_drop = 1.29 * 1.29;  // nearest dropped image distance^2 for x in the cell
        double image_tail = special::expint_e1(ew_.split * ew_.split * rho_drop) / (4.0 * M_PI * p_.mu) * 4.0;
        if (fourier_tail > ew_.accuracy || image_tail > ew_.accuracy)
            throw std::runtime_error("PeriodicGreen: requested accuracy not met at configured truncation");
        kappa_ = (1.0 - 0.5 * beta_) / (4.0 * M_PI * p_.mu);
    }

    const LameParams& params() const { return p_; }
    const EwaldParams& ewald() const { return ew_; }

    // R(x) on the closed cell [-1/2,1/2]^2 (direct Ewald path).
    Eigen::Matrix2d remainder(const Eigen::Vector2d& x) const {
        Eigen::Matrix2d r = fourier_term(x);
        for (int zx = -1; zx <= 1; ++zx)
            for (int zy = -1; zy <= 1; ++zy) {
                if (zx == 0 && zy == 0) continue;
                r += image_term(x + Eigen::Vector2d(zx, zy));
            }
        r += near_term(x);
        double s = 1.0 / (4.0 * ew_.split * ew_.split);
        r += (s / p_.mu) * Eigen::Matrix2d::Identity();
        return r;
    }

    // grad R: out[i] = d_i R (direct Ewald path).
    std::array<Eigen::Matrix2d, 2> remainder_gradient(const Eigen::Vector2d& x) const {
        auto g = fourier_term_gradient(x);
        for (int zx = -1; zx <= 1; ++zx)
            for (int zy = -1; zy <= 1; ++zy) {
                if (zx == 0 && zy == 0) continue;
                auto gi = image_term_gradient(x + Eigen::Vector2d(zx, zy));
                g[0] += gi[0];
                g[1] += gi[1];
            }
        auto gn = near_term_gradient(x);
        g[0] += gn[0];
        g[1] += gn[1];
        return g;
    }

    // G(x) = Gamma(x) + R(x), x in the closed cell, x != 0.
    Eigen::Matrix2d green(const Eigen::Vector2d& x) const {
        return kelvin2(x, p_) + remainder(x);
    }
    std::array<Eigen::Matrix2d, 2> green_gradient(const Eigen::Vector2d& x) const {
        auto g = kelvin_gradient2(x, p_);
        auto r = remainder_gradient(x);
        g[0] += r[0];
        g[1] += r[1];
        return g;
    }

    // ---- tabulated path (bicubic on an (n+1)^2 closed-cell grid) ----

    void build_table(int n = 256) const {
        table_n_ = n;
        double h = 1.0 / n;
        table_.assign(size_t(n + 1) * (n + 1) * 9, 0.0);
        for (int j = 0; j <= n; ++j)
            for (int i = 0; i <= n; ++i) {
                Eigen::Vector2d x(-0.5 + i * h, -0.5 + j * h);
                Eigen::Matrix2d r = remainder(x);
                auto g = remainder_gradient(x);
                double* t = &table_[(size_t(j) * (n + 1) + i) * 9];
                t[0] = r(0, 0); t[1] = r(0, 1); t[2] = r(1, 1);
                t[3] = g[0](0, 0); t[4] = g[0](0, 1); t[5] = g[0](1, 1);
                t[6] = g[1](0, 0); t[7] = g[1](0, 1); t[8] = g[1](1, 1);
            }
    }
    bool has_table() const { return table_n_ > 0; }

    // Interpolated R and grad R; falls back to the direct path without a table.
    void remainder_interp(const Eigen::Vector2d& x, Eigen::Matrix2d& r,
                          std::array<Eigen::Matrix2d, 2>* grad = nullptr) const {
        if (table_n_ == 0) {
            r = remainder(x);
            if (grad) *grad = remainder_gradient(x);
            return;
        }
        double vals[9];
        bicubic(x, vals);
        r << vals[0], vals[1], vals[1], vals[2];
        if (grad) {
            (*grad)[0] << vals[3], vals[4], vals[4], vals[5];
            (*grad)[1] << vals[6], vals[7], vals[7], vals[8];
        }
    }

    // Remainder of the scaled Green function at an arbitrary separation w
    // (|w|_inf may exceed 1/2): G is periodic but Gamma is not, so wrapping
    // carries the Gamma difference along.
    Eigen::Matrix2d remainder_wrapped(const Eigen::Vector2d& w, bool use_table = true) const {
        Eigen::Vector2d wh = wrap(w);
        Eigen::Matrix2d r;
        if (use_table) remainder_interp(wh, r);
        else r = remainder(wh);
        if ((wh - w).squaredNorm() > 1e-28) r += kelvin2(wh, p_) - kelvin2(w, p_);
        return r;
    }
    std::array<Eigen::Matrix2d, 2> remainder_gradient_wrapped(const Eigen::Vector2d& w,
                                                              bool use_table = true) const {
        Eigen::Vector2d wh = wrap(w);
        Eigen::Matrix2d r;
        std::array<Eigen::Matrix2d, 2> g;
        if (use_table) remainder_interp(wh, r, &g);
        else g = remainder_gradient(wh);
        if ((wh - w).squaredNorm() > 1e-28) {
            auto gw = kelvin_gradient2(wh, p_);
            auto gv = kelvin_gradient2(w, p_);
            g[0] += gw[0] - gv[0];
            g[1] += gw[1] - gv[1];
        }
        return g;
    }

    static Eigen::Vector2d wrap(const Eigen::Vector2d& w) {
        return {w.x() - std::round(w.x()), w.y() - std::round(w.y())};
    }

private:
    LameParams p_;
    EwaldParams ew_;
    double beta_;
    double kappa_;
    mutable int table_n_ = 0;
    mutable std::vector<double> table_;

    // Gaussian-damped Fourier parts of -(1/mu)[phi2 I + beta grad grad phi4].
    Eigen::Matrix2d fourier_term(const Eigen::Vector2d& x) const {
        const int K = ew_.kmax;
        const double s = 1.0 / (4.0 * ew_.split * ew_.split);
        std::vector<double> c1(2 * K + 1), s1(2 * K + 1), c2(2 * K + 1), s2(2 * K + 1);
        for (int k = -K; k <= K; ++k) {
            c1[k + K] = std::cos(2.0 * M_PI * k * x.x());
            s1[k + K] = std::sin(2.0 * M_PI * k * x.x());
            c2[k + K] = std::cos(2.0 * M_PI * k * x.y());
            s2[k + K] = std::sin(2.0 * M_PI * k * x.y());
        }
        double a = 0.0, b00 = 0.0, b01 = 0.0, b11 = 0.0;
        for (int k1 = -K; k1 <= K; ++k1)
            for (int k2 = -K; k2 <= K; ++k2) {
                if (k1 == 0 && k2 == 0) continue;
                double q1 = 2.0 * M_PI * k1, q2 = 2.0 * M_PI * k2;
                double qq = q1 * q1 + q2 * q2;
                double damp = std::exp(-s * qq);
                double cosqx = c1[k1 + K] * c2[k2 + K] - s1[k1 + K] * s2[k2 + K];
                a += damp / qq * cosqx;
                double f4 = damp * (1.0 + s * qq) / (qq * qq) * cosqx;
                b00 -= q1 * q1 * f4;
                b01 -= q1 * q2 * f4;
                b11 -= q2 * q2 * f4;
            }
        Eigen::Matrix2d m;
        m << a + beta_ * b00, beta_ * b01, beta_ * b01, a + beta_ * b11;
        return -(1.0 / p_.mu) * m;
    }

    std::array<Eigen::Matrix2d, 2> fourier_term_gradient(const Eigen::Vector2d& x) const {
        const int K = ew_.kmax;
        const double s = 1.0 / (4.0 * ew_.split * ew_.split);
        std::vector<double> c1(2 * K + 1), s1(2 * K + 1), c2(2 * K + 1), s2(2 * K + 1);
        for (int k = -K; k <= K; ++k) {
            c1[k + K] = std::cos(2.0 * M_PI * k * x.x());
            s1[k + K] = std::sin(2.0 * M_PI * k * x.x());
            c2[k + K] = std::cos(2.0 * M_PI * k * x.y());
            s2[k + K] = std::sin(2.0 * M_PI * k * x.y());
        }
        double da[2] = {0, 0};
        double db00[2] = {0, 0}, db01[2] = {0, 0}, db11[2] = {0, 0};
        for (int k1 = -K; k1 <= K; ++k1)
            for (int k2 = -K; k2 <= K; ++k2) {
                if (k1 == 0 && k2 == 0) continue;
                double q[2] = {2.0 * M_PI * k1, 2.0 * M_PI * k2};
                double qq = q[0] * q[0] + q[1] * q[1];
                double damp = std::exp(-s * qq);
                double sinqx = s1[k1 + K] * c2[k2 + K] + c1[k1 + K] * s2[k2 + K];
                double f4 = damp * (1.0 + s * qq) / (qq * qq) * sinqx;
                for (int i = 0; i < 2; ++i) {
                    da[i] -= damp / qq * q[i] * sinqx;
                    db00[i] += q[i] * q[0] * q[0] * f4;
                    db01[i] += q[i] * q[0] * q[1] * f4;
                    db11[i] += q[i] * q[1] * q[1] * f4;
                }
            }
        std::array<Eigen::Matrix2d, 2> g;
        for (int i = 0; i < 2; ++i) {
            Eigen::Matrix2d m;
            m << da[i] + beta_ * db00[i], beta_ * db01[i], beta_ * db01[i], da[i] + beta_ * db11[i];
            g[i] = -(1.0 / p_.mu) * m;
        }
        return g;
    }

    // Screened image term -(1/mu)[F2 I + beta (4 F4'' y y^T + 2 F4' I)], y != 0.
    Eigen::Matrix2d image_term(const Eigen::Vector2d& y) const {
        double a2 = ew_.split * ew_.split, rho = y.squaredNorm();
        double e1 = special::expint_e1(a2 * rho);
        double f2 = e1 / (4.0 * M_PI);
        double f4p = -e1 / (16.0 * M_PI);
        double f4pp = std::exp(-a2 * rho) / (16.0 * M_PI * rho);
        Eigen::Matrix2d m = (f2 + 2.0 * beta_ * f4p) * Eigen::Matrix2d::Identity();
        m += 4.0 * beta_ * f4pp * (y * y.transpose());
        return -(1.0 / p_.mu) * m;
    }

    std::array<Eigen::Matrix2d, 2> image_term_gradient(const Eigen::Vector2d& y) const {
        double a2 = ew_.split * ew_.split, rho = y.squaredNorm();
        double e = std::exp(-a2 * rho);
        double f2p = -e / (4.0 * M_PI * rho);
        double f4pp = e / (16.0 * M_PI * rho);
        double f4ppp = -e * (1.0 + a2 * rho) / (16.0 * M_PI * rho * rho);
        std::array<Eigen::Matrix2d, 2> g;
        for (int i = 0; i < 2; ++i) {
            Eigen::Matrix2d m = 2.0 * f2p * y[i] * Eigen::Matrix2d::Identity();
            m += 8.0 * beta_ * f4ppp * y[i] * (y * y.transpose());
            Eigen::Matrix2d sym = Eigen::Matrix2d::Zero();
            for (int j = 0; j < 2; ++j)
                for (int k = 0; k < 2; ++k)
                    sym(j, k) = (i == j ? y[k] : 0.0) + (i == k ? y[j] : 0.0) + (j == k ? y[i] : 0.0);
            m += 4.0 * beta_ * f4pp * sym;
            g[i] = -(1.0 / p_.mu) * m;
        }
        return g;
    }

    // z = 0 image minus Gamma; smooth through the origin:
    //   kappa [gamma_E + log a^2 - Ein(a^2 rho)] I + (beta/4 pi mu) W(rho) x x^T,
    // W(rho) = (1 - e^{-a^2 rho})/rho.
    Eigen::Matrix2d near_term(const Eigen::Vector2d& x) const {
        const double euler = 0.57721566490153286060651209;
        double a2 = ew_.split * ew_.split, rho = x.squaredNorm();
        double wv = a2 * special::h_ratio(a2 * rho);
        Eigen::Matrix2d m =
            kappa_ * (euler + std::log(a2) - special::ein(a2 * rho)) * Eigen::Matrix2d::Identity();
        m += (beta_ / (4.0 * M_PI * p_.mu)) * wv * (x * x.transpose());
        return m;
    }

    std::array<Eigen::Matrix2d, 2> near_term_gradient(const Eigen::Vector2d& x) const {
        double a2 = ew_.split * ew_.split, rho = x.squaredNorm();
        double u = a2 * rho;
        double wv = a2 * special::h_ratio(u);
        double wp = a2 * a2 * special::h_ratio_prime(u);
        const double cb = beta_ / (4.0 * M_PI * p_.mu);
        std::array<Eigen::Matrix2d, 2> g;
        for (int i = 0; i < 2; ++i) {
            Eigen::Matrix2d m = -2.0 * kappa_ * wv * x[i] * Eigen::Matrix2d::Identity();
            m += cb * 2.0 * wp * x[i] * (x * x.transpose());
            Eigen::Matrix2d sym = Eigen::Matrix2d::Zero();
            for (int j = 0; j < 2; ++j)
                for (int k = 0; k < 2; ++k)
                    sym(j, k) = (i == j ? x[k] : 0.0) + (i == k ? x[j] : 0.0);
            m += cb * wv * sym;
            g[i] = m;
        }
        return g;
    }

    void bicubic(const Eigen::Vector2d& x, double out[9]) const {
        const int n = table_n_;
        double h = 1.0 / n;
        double gx = (x.x() + 0.5) / h, gy = (x.y() + 0.5) / h;
        if (gx < -1e-9 || gx > n + 1e-9 || gy < -1e-9 || gy > n + 1e-9)
            throw std::domain_error("PeriodicGreen: interpolation point outside the closed cell");
        int ix = std::clamp(int(std::floor(gx)) - 1, 0, n - 3);
        int iy = std::clamp(int(std::floor(gy)) - 1, 0, n - 3);
        double lx[4], ly[4];
        lagrange4(gx - ix, lx);
        lagrange4(gy - iy, ly);
        for (int c = 0; c < 9; ++c) out[c] = 0.0;
        for (int b = 0; b < 4; ++b)
            for (int a = 0; a < 4; ++a) {
                double wgt = lx[a] * ly[b];
                const double* t = &table_[(size_t(iy + b) * (n + 1) + (ix + a)) * 9];
                for (int c = 0; c < 9; ++c) out[c] += wgt * t[c];
            }
    }

    // 4-point Lagrange basis at offset t in [0,3]
    static void lagrange4(double t, double l[4]) {
        l[0] = -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0;
        l[1] = t * (t - 2.0) * (t - 3.0) / 2.0;
        l[2] = -t * (t - 1.0) * (t - 3.0) / 2.0;
        l[3] = t * (t - 1.0) * (t - 2.0) / 6.0;
    }
};

// G^eta(x) = Gamma(x) + R(eta x), the 2D convention with the log-eta constant
// subtracted; solves L[G^eta_k] = (delta_0 - eta^2) e_k on the scaled torus.
class ScaledGreen {
public:
    ScaledGreen(std::shared_ptr<const PeriodicGreen> pg, double eta) : pg_(std::move(pg)), eta_(eta) {
        if (!(eta_ > 0.0 && eta_ <= 0.5))
            throw std::invalid_argument("ScaledGreen: eta must lie in (0, 1/2]");
    }
    double eta() const { return eta_; }
    const PeriodicGreen& green() const { return *pg_; }

    Eigen::Matrix2d value(const Eigen::Vector2d& x, bool use_table = true) const {
        if (x.squaredNorm() == 0.0) throw std::domain_error("ScaledGreen: singular point x = 0");
        return kelvin2(x, pg_->params()) + pg_->remainder_wrapped(eta_ * x, use_table);
    }
    std::array<Eigen::Matrix2d, 2> gradient(const Eigen::Vector2d& x, bool use_table = true) const {
        if (x.squaredNorm() == 0.0) throw std::domain_error("ScaledGreen: singular point x = 0");
        auto g = kelvin_gradient2(x, pg_->params());
        auto r = pg_->remainder_gradient_wrapped(eta_ * x, use_table);
        g[0] += eta_ * r[0];
        g[1] += eta_ * r[1];
        return g;
    }

private:
    std::shared_ptr<const PeriodicGreen> pg_;
    double eta_;
};

}  // namespace perfhom

#endif
