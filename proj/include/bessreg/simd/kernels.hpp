#pragma once

// Data-parallel inner loops of the bessel EM. Each kernel has a scalar
// reference implementation and an AVX2/FMA variant; the variant is chosen at
// runtime from the host CPU (override with BESSREG_SIMD=scalar|avx2 or
// force_isa()). Variants agree to a few ulps per element; reductions may
// differ in the last bits because lanes are summed in a different order.

#include <span>
#include <string_view>

namespace bessreg::simd {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);
bool isa_available(Isa isa);

/// ISA used by the dispatching entry points below.
Isa active_isa();

/// Pins the dispatch to `isa`; throws if the CPU lacks it.
void force_isa(Isa isa);

/// Inverse links: mu = logistic(eta), phi = exp(log_phi).
void inverse_links(std::span<const double> eta, std::span<const double> log_phi,
                   std::span<double> mu, std::span<double> phi);

/// Per-observation terms of the EM Q-function with E-step weights psi fixed:
///   Q_i  = log mu + log(1-mu) + 2 log phi + phi - psi phi^2 A / 2
///   wk_i = 1 - 2 mu + psi phi^2 mu (1-mu) (z-mu) / (z(1-z))
///   wl_i = 2 + phi - psi phi^2 A
/// with A = mu^2/z + (1-mu)^2/(1-z). wk and wl are the derivatives of Q_i with
/// respect to the mean and precision linear predictors. Returns sum_i Q_i.
double q_terms(std::span<const double> eta, std::span<const double> log_phi,
               std::span<const double> z, std::span<const double> psi,
               std::span<double> wk, std::span<double> wl);

namespace scalar {
void inverse_links(std::span<const double> eta, std::span<const double> log_phi,
                   std::span<double> mu, std::span<double> phi);
double q_terms(std::span<const double> eta, std::span<const double> log_phi,
               std::span<const double> z, std::span<const double> psi,
               std::span<double> wk, std::span<double> wl);
}  // namespace scalar

namespace avx2 {
void inverse_links(std::span<const double> eta, std::span<const double> log_phi,
                   std::span<double> mu, std::span<double> phi);
double q_terms(std::span<const double> eta, std::span<const double> log_phi,
               std::span<const double> z, std::span<const double> psi,
               std::span<double> wk, std::span<double> wl);
}  // namespace avx2

}  // namespace bessreg::simd
