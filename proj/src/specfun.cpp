#include "bessreg/specfun.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace bessreg::specfun {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr int kMaxIter = 10000;

void check_positive(double x, const char* fn) {
    if (!(x > 0.0) || std::isnan(x)) {
        throw DomainError(std::string(fn) + ": argument must be > 0, got " + std::to_string(x));
    }
}

// Ascending series, valid (and accurate) for 0 < x < 2.
//   K0(x) = -(ln(x/2) + gamma) I0(x) + sum_{k>=1} H_k q^k/(k!)^2
//   K1(x) = 1/x + ln(x/2) I1(x) - (x/4) sum_k [psi(k+1)+psi(k+2)] q^k/(k!(k+1)!)
// with q = x^2/4 and psi(k+1) = -gamma + H_k.
void k01_series(double x, double& k0, double& k1) {
    const double q = 0.25 * x * x;
    const double lnh = std::log(0.5 * x);
    constexpr double gamma = std::numbers::egamma;

    double i0 = 0.0, i1 = 0.0, s0 = 0.0, s1 = 0.0;
    double t0 = 1.0;        // q^k / (k!)^2
    double t1 = 0.5 * x;    // (x/2) q^k / (k!(k+1)!)
    double hk = 0.0;        // H_k
    for (int k = 0; k < 200; ++k) {
        const double psi_k1 = -gamma + hk;
        const double psi_k2 = psi_k1 + 1.0 / (k + 1);
        i0 += t0;
        i1 += t1;
        s0 += t0 * psi_k1;
        s1 += t1 * (psi_k1 + psi_k2);
        if (t0 < kEps * 1e-2 * std::abs(i0) && t1 < kEps * 1e-2 * std::abs(i1)) break;
        t0 *= q / ((k + 1.0) * (k + 1.0));
        t1 *= q / ((k + 1.0) * (k + 2.0));
        hk += 1.0 / (k + 1);
    }
    k0 = -lnh * i0 + s0;
    k1 = 1.0 / x + lnh * i1 - 0.5 * s1;
}

// Steed's algorithm for Temme's CF2 at order 0 (x >= 2). Returns the scaled
// pair e^x K0, e^x K1.
void k01_scaled_cf(double x, double& k0e, double& k1e) {
    double b = 2.0 * (1.0 + x);
    double d = 1.0 / b;
    double h = d;
    double delh = d;
    double q1 = 0.0, q2 = 1.0;
    const double a1 = 0.25;
    double q = a1, c = a1;
    double a = -a1;
    double s = 1.0 + q * delh;
    for (int i = 1; i < kMaxIter; ++i) {
        a -= 2 * i;
        c = -a * c / (i + 1.0);
        const double qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        const double dels = q * delh;
        s += dels;
        if (std::abs(dels / s) < kEps) break;
    }
    h *= a1;
    k0e = std::sqrt(std::numbers::pi / (2.0 * x)) / s;
    k1e = k0e * (x + 0.5 - h) / x;
}

}  // namespace

std::array<double, 4> bessel_k_scaled_all(double x) {
    check_positive(x, "bessel_k_scaled");
    double k0e, k1e;
    if (x < 2.0) {
        double k0, k1;
        k01_series(x, k0, k1);
        const double ex = std::exp(x);
        k0e = k0 * ex;
        k1e = k1 * ex;
    } else {
        k01_scaled_cf(x, k0e, k1e);
    }
    const double k2e = k0e + 2.0 / x * k1e;
    const double k3e = k1e + 4.0 / x * k2e;
    return {k0e, k1e, k2e, k3e};
}

double bessel_k_scaled(int order, double x) {
    if (order < 0 || order > 3) {
        throw DomainError("bessel_k_scaled: unsupported order " + std::to_string(order));
    }
    return bessel_k_scaled_all(x)[static_cast<std::size_t>(order)];
}

double log_bessel_k(int order, double x) {
    return std::log(bessel_k_scaled(order, x)) - x;
}

double exp_integral_e1(double x) {
    check_positive(x, "exp_integral_e1");
    if (x <= 1.0) {
        // E1(x) = -gamma - ln x - sum_{k>=1} (-x)^k / (k k!)
        double sum = 0.0;
        double term = 1.0;  // (-x)^k / k!
        for (int k = 1; k < 200; ++k) {
            term *= -x / k;
            const double add = term / k;
            sum += add;
            if (std::abs(add) < kEps * 1e-2 * std::abs(sum)) break;
        }
        return -std::numbers::egamma - std::log(x) - sum;
    }
    return exp_integral_en_scaled(1, x) * std::exp(-x);
}

double exp_integral_en_scaled(int n, double x) {
    check_positive(x, "exp_integral_en_scaled");
    if (n < 1) throw DomainError("exp_integral_en_scaled: order must be >= 1");
    if (x <= 1.0) {
        // Upward recurrence E_{k+1} = (e^{-x} - x E_k)/k from E_1 loses nothing
        // here because x <= 1 keeps every term O(1).
        double en = exp_integral_e1(x);
        const double emx = std::exp(-x);
        for (int k = 1; k < n; ++k) en = (emx - x * en) / k;
        return en * std::exp(x);
    }
    // Modified Lentz evaluation of the continued fraction for e^x E_n(x).
    const double tiny = std::numeric_limits<double>::min() / kEps;
    double b = x + n;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kMaxIter; ++i) {
        const double an = -static_cast<double>(i) * (n - 1 + i);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        const double del = c * d;
        h *= del;
        if (std::abs(del - 1.0) < kEps) break;
    }
    return h;
}

}  // namespace bessreg::specfun
