#pragma once

#include "bessreg/rng.hpp"
#include "bessreg/specfun.hpp"

namespace bessreg {

/// Mean-precision parameters of the bessel (normalized inverse-Gaussian) law.
/// Shapes are alpha = mu*phi and beta = (1-mu)*phi.
struct BesselParams {
    double mu;
    double phi;
};

/// Mean-precision parameters of the beta law (shapes mu*phi, (1-mu)*phi).
struct BetaParams {
    double mu;
    double phi;
};

/// A response value pulled into [kUnitClamp, 1 - kUnitClamp].
struct ClampedUnit {
    double z;
    bool clamped;
};

inline constexpr double kUnitClamp = 1e-12;

/// Rejects z outside (0,1); clamps values within kUnitClamp of a boundary.
ClampedUnit clamp_unit(double z);

/// sqrt(1 + (z-mu)^2 / (z(1-z))).
double zeta(double mu, double z);

double bessel_logpdf(const BesselParams& p, double z, bool* clamped = nullptr);
double bessel_pdf(const BesselParams& p, double z);

/// P(Z <= z) by adaptive Gauss-Kronrod quadrature of the density
/// (absolute error ~1e-10).
double bessel_cdf(const BesselParams& p, double z, bool* clamped = nullptr);

/// (1 - phi + phi^2 e^phi E_1(phi)) / 2, evaluated as e^phi E_3(phi).
double g_bessel(double phi);

/// 1 / (1 + phi).
double g_beta(double phi);

struct MeanVar {
    double mean;
    double variance;
};

MeanVar bessel_mean_var(const BesselParams& p);
MeanVar beta_mean_var(const BetaParams& p);

/// Inverse-Gaussian draw with mean = variance = alpha (mean alpha, shape
/// alpha^2), by the Michael-Schucany-Haas transformation.
double sample_ig(double alpha, Rng& rng);

/// Y1 / (Y1 + Y2) with Y1 ~ IG(mu phi), Y2 ~ IG((1-mu) phi).
double sample_bessel(const BesselParams& p, Rng& rng);

double beta_logpdf(const BetaParams& p, double z, bool* clamped = nullptr);
double beta_cdf(const BetaParams& p, double z, bool* clamped = nullptr);

/// Ratio of two independent gamma draws with shapes mu phi and (1-mu) phi.
double sample_beta(const BetaParams& p, Rng& rng);

}  // namespace bessreg
