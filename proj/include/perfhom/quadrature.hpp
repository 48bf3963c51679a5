#ifndef PERFHOM_QUADRATURE_HPP
#define PERFHOM_QUADRATURE_HPP

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace perfhom {

// Martensen-Kussmaul / Kress weights for the periodic log kernel:
//   int_0^{2pi} f(phi) log(4 sin^2((t - phi)/2)) dphi  ~=  sum_j R_j(t) f(theta_j)
// on N (even) equispaced nodes. R_j(theta_i) depends only on (i - j) mod N.
inline std::vector<double> kress_log_weights(int n_nodes) {
    if (n_nodes % 2 != 0) throw std::invalid_argument("kress_log_weights: even node count required");
    int half = n_nodes / 2;
    std::vector<double> r(n_nodes);
    for (int d = 0; d < n_nodes; ++d) {
        double tau = 2.0 * M_PI * d / n_nodes;
        double s = 0.0;
        for (int m = 1; m < half; ++m) s += std::cos(m * tau) / m;
        r[d] = -(2.0 * M_PI / half) * s - (M_PI / (half * double(half))) * std::cos(half * tau);
    }
    return r;
}

// Alternating-point ("odd-even") trapezoid weights for principal values on a
// closed curve: weight 2*(2pi/N) on nodes at odd index offset from the target,
// zero otherwise. Spectrally accurate for Cauchy-type kernels.
inline double oddeven_pv_weight(int i, int j, int n_nodes) {
    return (((i - j) % 2 + 2) % 2 == 1) ? 2.0 * (2.0 * M_PI / n_nodes) : 0.0;
}

// Values of the trigonometric interpolant of periodic samples f (length N,
// nodes 2*pi*j/N) on the refined grid with factor `factor` (length N*factor).
inline std::vector<double> trig_upsample(const std::vector<double>& f, int factor) {
    const int n = int(f.size());
    if (n % 2 != 0) throw std::invalid_argument("trig_upsample: even sample count required");
    const int half = n / 2;
    // DFT coefficients a_k, b_k (real form)
    std::vector<double> a(half + 1, 0.0), b(half + 1, 0.0);
    for (int k = 0; k <= half; ++k) {
        double ca = 0.0, cb = 0.0;
        for (int j = 0; j < n; ++j) {
            double ang = 2.0 * M_PI * k * j / n;
            ca += f[j] * std::cos(ang);
            cb += f[j] * std::sin(ang);
        }
        a[k] = 2.0 * ca / n;
        b[k] = 2.0 * cb / n;
    }
    std::vector<double> out(size_t(n) * factor);
    for (size_t i = 0; i < out.size(); ++i) {
        double t = 2.0 * M_PI * double(i) / double(out.size());
        double s = 0.5 * a[0];
        for (int k = 1; k < half; ++k) s += a[k] * std::cos(k * t) + b[k] * std::sin(k * t);
        s += 0.5 * a[half] * std::cos(half * t);  // Nyquist mode, samples are real
        out[i] = s;
    }
    return out;
}

}  // namespace perfhom

#endif
