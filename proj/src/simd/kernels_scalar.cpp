#include "bessreg/simd/kernels.hpp"

#include <cmath>

namespace bessreg::simd::scalar {

void inverse_links(std::span<const double> eta, std::span<const double> log_phi,
                   std::span<double> mu, std::span<double> phi) {
    const std::size_t n = eta.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double t = std::exp(-std::abs(eta[i]));
        const double r = 1.0 / (1.0 + t);
        mu[i] = eta[i] >= 0.0 ? r : t * r;
        phi[i] = std::exp(log_phi[i]);
    }
}

double q_terms(std::span<const double> eta, std::span<const double> log_phi,
               std::span<const double> z, std::span<const double> psi,
               std::span<double> wk, std::span<double> wl) {
    const std::size_t n = eta.size();
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double ae = std::abs(eta[i]);
        const double t = std::exp(-ae);
        const double r = 1.0 / (1.0 + t);
        const double mu = eta[i] >= 0.0 ? r : t * r;
        const double omu = eta[i] >= 0.0 ? t * r : r;
        const double log_m = -ae - 2.0 * std::log1p(t);
        const double phi = std::exp(log_phi[i]);
        const double zi = z[i];
        const double zz = zi * (1.0 - zi);
        const double dz = zi - mu;
        const double a = 1.0 + dz * dz / zz;
        const double pp = psi[i] * phi * phi;
        sum += log_m + 2.0 * log_phi[i] + phi - 0.5 * pp * a;
        wk[i] = (omu - mu) + pp * mu * omu * dz / zz;
        wl[i] = 2.0 + phi - pp * a;
    }
    return sum;
}

}  // namespace bessreg::simd::scalar
