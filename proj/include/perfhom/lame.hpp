#ifndef PERFHOM_LAME_HPP
#define PERFHOM_LAME_HPP

#include <cmath>
#include <stdexcept>

namespace perfhom {

// Lame parameters (lambda, mu) with the derived Kelvin constants.
// Validity: mu > 0 and dim*lambda + 2*mu > 0, which implies lambda + mu > 0.
struct LameParams {
    double lambda = 1.0;
    double mu = 1.0;
    int dim = 2;

    // cached constants
    double c1 = 0.0;  // (1/mu + 1/(lambda+2mu))/2
    double c2 = 0.0;  // (1/mu - 1/(lambda+2mu))/2
    double omega_d = 0.0;  // area of the unit sphere in R^dim

    LameParams() { finalize(); }
    LameParams(double lambda_, double mu_, int dim_ = 2)
        : lambda(lambda_), mu(mu_), dim(dim_) {
        finalize();
    }

    void finalize() {
        if (dim != 2 && dim != 3)
            throw std::invalid_argument("LameParams: dim must be 2 or 3");
        if (!(mu > 0.0))
            throw std::invalid_argument("LameParams: mu must be positive");
        if (!(dim * lambda + 2.0 * mu > 0.0))
            throw std::invalid_argument("LameParams: need dim*lambda + 2*mu > 0");
        c1 = 0.5 * (1.0 / mu + 1.0 / (lambda + 2.0 * mu));
        c2 = 0.5 * (1.0 / mu - 1.0 / (lambda + 2.0 * mu));
        omega_d = (dim == 2) ? 2.0 * M_PI : 4.0 * M_PI;
    }
};

struct LameConstants {
    double c1;
    double c2;
    double omega_d;
};

inline LameConstants lame_constants(const LameParams& p) {
    return {p.c1, p.c2, p.omega_d};
}

}  // namespace perfhom

#endif
