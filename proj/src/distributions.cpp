#include "bessreg/distributions.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace bessreg {
namespace {

void check_params(double mu, double phi, const char* fn) {
    if (!(mu > 0.0 && mu < 1.0) || !(phi > 0.0) || !std::isfinite(phi)) {
        throw DomainError(std::string(fn) + ": need 0 < mu < 1 and phi > 0 (mu=" +
                          std::to_string(mu) + ", phi=" + std::to_string(phi) + ")");
    }
}

// Log-density without argument checks; z must be strictly inside (0,1).
double bessel_logpdf_raw(double mu, double phi, double z) {
    const double zz = z * (1.0 - z);
    const double dz = z - mu;
    const double zt = std::sqrt(1.0 + dz * dz / zz);
    const double x = phi * zt;
    // phi - x = phi (1 - zeta) <= 0 keeps the exponent bounded.
    return std::log(mu) + std::log1p(-mu) + std::log(phi) + (phi - x) - std::log(std::numbers::pi) -
           1.5 * std::log(zz) - std::log(zt) + std::log(specfun::bessel_k_scaled(1, x));
}

// int_0^width f(z) dz with the substitution z = t^2, which tames the
// z^{-1/2} endpoint behaviour of small-precision densities. For small phi the
// density also has a boundary layer at t ~ phi * mu, so the t-range is cut
// geometrically from that scale upwards.
template <class F>
double integrate_from_zero(F&& f, double width, double layer) {
    using boost::math::quadrature::gauss_kronrod;
    if (width <= 0.0) return 0.0;
    const double tmax = std::sqrt(width);
    auto g = [&](double t) {
        const double z = t * t;
        return z > 0.0 ? 2.0 * t * f(z) : 0.0;
    };
    double total = 0.0, a = 0.0, b = std::min(tmax, 0.25 * layer);
    while (a < tmax) {
        double err = 0.0;
        total += gauss_kronrod<double, 31>::integrate(g, a, b, 15, 1e-11, &err);
        a = b;
        b = std::min(tmax, 4.0 * b);
    }
    return total;
}

}  // namespace

ClampedUnit clamp_unit(double z) {
    if (!(z > 0.0 && z < 1.0)) {
        throw DomainError("response must lie strictly inside (0,1), got " + std::to_string(z));
    }
    if (z < kUnitClamp) return {kUnitClamp, true};
    if (z > 1.0 - kUnitClamp) return {1.0 - kUnitClamp, true};
    return {z, false};
}

double zeta(double mu, double z) {
    if (!(z > 0.0 && z < 1.0)) throw DomainError("zeta: z must lie in (0,1)");
    if (!(mu > 0.0 && mu < 1.0)) throw DomainError("zeta: mu must lie in (0,1)");
    const double d = z - mu;
    return std::sqrt(1.0 + d * d / (z * (1.0 - z)));
}

double bessel_logpdf(const BesselParams& p, double z, bool* clamped) {
    check_params(p.mu, p.phi, "bessel_logpdf");
    const auto c = clamp_unit(z);
    if (clamped) *clamped = c.clamped;
    return bessel_logpdf_raw(p.mu, p.phi, c.z);
}

double bessel_pdf(const BesselParams& p, double z) { return std::exp(bessel_logpdf(p, z)); }

double bessel_cdf(const BesselParams& p, double z, bool* clamped) {
    check_params(p.mu, p.phi, "bessel_cdf");
    const auto c = clamp_unit(z);
    if (clamped) *clamped = c.clamped;
    // Integrate from the edge nearer to z so the range never crosses the
    // peak near mu; the upper tail uses f(1 - u; mu) = f(u; 1 - mu) so that
    // z close to 1 is never formed as 1 - u.
    if (c.z <= p.mu) {
        auto f = [&](double u) { return std::exp(bessel_logpdf_raw(p.mu, p.phi, u)); };
        return std::clamp(integrate_from_zero(f, c.z, p.phi * p.mu), 0.0, 1.0);
    }
    const double nu = 1.0 - p.mu;
    auto f = [&](double u) { return std::exp(bessel_logpdf_raw(nu, p.phi, u)); };
    return std::clamp(1.0 - integrate_from_zero(f, 1.0 - c.z, p.phi * nu), 0.0, 1.0);
}

double g_bessel(double phi) {
    if (!(phi >= 0.0)) throw DomainError("g_bessel: phi must be >= 0");
    if (phi == 0.0) return 0.5;
    return specfun::exp_integral_en_scaled(3, phi);
}

double g_beta(double phi) {
    if (!(phi >= 0.0)) throw DomainError("g_beta: phi must be >= 0");
    return 1.0 / (1.0 + phi);
}

MeanVar bessel_mean_var(const BesselParams& p) {
    check_params(p.mu, p.phi, "bessel_mean_var");
    return {p.mu, p.mu * (1.0 - p.mu) * g_bessel(p.phi)};
}

MeanVar beta_mean_var(const BetaParams& p) {
    check_params(p.mu, p.phi, "beta_mean_var");
    return {p.mu, p.mu * (1.0 - p.mu) * g_beta(p.phi)};
}

double sample_ig(double alpha, Rng& rng) {
    if (!(alpha > 0.0)) throw DomainError("sample_ig: alpha must be > 0");
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unif;
    const double nu = normal(rng);
    const double y = nu * nu;
    // Roots of x^2 - (2 alpha + y) x + alpha^2 = 0; product of roots is alpha^2.
    const double big = alpha + 0.5 * y + 0.5 * std::sqrt(y * y + 4.0 * alpha * y);
    const double small = alpha * alpha / big;
    return unif(rng) <= alpha / (alpha + small) ? small : big;
}

namespace {
double ratio_in_unit(double a, double b) {
    double z = a / (a + b);
    if (!(z > 0.0)) z = std::numeric_limits<double>::min();
    if (!(z < 1.0)) z = std::nextafter(1.0, 0.0);
    return z;
}
}  // namespace

double sample_bessel(const BesselParams& p, Rng& rng) {
    check_params(p.mu, p.phi, "sample_bessel");
    const double y1 = sample_ig(p.mu * p.phi, rng);
    const double y2 = sample_ig((1.0 - p.mu) * p.phi, rng);
    return ratio_in_unit(y1, y2);
}

double beta_logpdf(const BetaParams& p, double z, bool* clamped) {
    check_params(p.mu, p.phi, "beta_logpdf");
    const auto c = clamp_unit(z);
    if (clamped) *clamped = c.clamped;
    const double a = p.mu * p.phi;
    const double b = (1.0 - p.mu) * p.phi;
    return std::lgamma(p.phi) - std::lgamma(a) - std::lgamma(b) + (a - 1.0) * std::log(c.z) +
           (b - 1.0) * std::log1p(-c.z);
}

double beta_cdf(const BetaParams& p, double z, bool* clamped) {
    check_params(p.mu, p.phi, "beta_cdf");
    const auto c = clamp_unit(z);
    if (clamped) *clamped = c.clamped;
    return boost::math::ibeta(p.mu * p.phi, (1.0 - p.mu) * p.phi, c.z);
}

double sample_beta(const BetaParams& p, Rng& rng) {
    check_params(p.mu, p.phi, "sample_beta");
    std::gamma_distribution<double> ga(p.mu * p.phi, 1.0);
    std::gamma_distribution<double> gb((1.0 - p.mu) * p.phi, 1.0);
    const double y1 = ga(rng);
    const double y2 = gb(rng);
    return ratio_in_unit(y1, y2);
}

}  // namespace bessreg
