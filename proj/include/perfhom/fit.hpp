#ifndef PERFHOM_FIT_HPP
#define PERFHOM_FIT_HPP

#include <cmath>
#include <stdexcept>
#include <vector>

namespace perfhom {

enum class FitLaw {
    power,   // y = C x^p, least squares in (log x, log y)
    loglaw,  // y = C (1/|log x|)^p, least squares in (log 1/|log x|, log y)
};

struct FitResult {
    double coefficient = 0.0;
    double exponent = 0.0;
    double r_squared = 0.0;
};

inline FitResult fit_rate(const std::vector<double>& xs, const std::vector<double>& ys,
                          FitLaw law) {
    if (xs.size() != ys.size() || xs.size() < 3)
        throw std::invalid_argument("fit_rate: need at least 3 points");
    const size_t n = xs.size();
    std::vector<double> u(n), v(n);
    for (size_t i = 0; i < n; ++i) {
        if (!(xs[i] > 0.0) || !(ys[i] > 0.0))
            throw std::invalid_argument("fit_rate: values must be positive");
        double x = xs[i];
        u[i] = (law == FitLaw::power) ? std::log(x) : std::log(1.0 / std::abs(std::log(x)));
        v[i] = std::log(ys[i]);
    }
    double su = 0.0, sv = 0.0, suu = 0.0, suv = 0.0;
    for (size_t i = 0; i < n; ++i) {
        su += u[i];
        sv += v[i];
        suu += u[i] * u[i];
        suv += u[i] * v[i];
    }
    double denom = n * suu - su * su;
    if (denom == 0.0) throw std::invalid_argument("fit_rate: degenerate abscissae");
    FitResult r;
    r.exponent = (n * suv - su * sv) / denom;
    double intercept = (sv - r.exponent * su) / n;
    r.coefficient = std::exp(intercept);
    double ss_res = 0.0, ss_tot = 0.0, vbar = sv / n;
    for (size_t i = 0; i < n; ++i) {
        double fit = intercept + r.exponent * u[i];
        ss_res += (v[i] - fit) * (v[i] - fit);
        ss_tot += (v[i] - vbar) * (v[i] - vbar);
    }
    r.r_squared = (ss_tot == 0.0) ? 1.0 : 1.0 - ss_res / ss_tot;
    return r;
}

}  // namespace perfhom

#endif
