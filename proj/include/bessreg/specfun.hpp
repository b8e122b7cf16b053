#pragma once

#include <array>
#include <stdexcept>
#include <string>

namespace bessreg {

/// Raised when an argument lies outside the mathematical domain of a function.
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

namespace specfun {

/// Exponentially scaled modified Bessel function of the second kind,
/// e^x * K_order(x), for integer orders 0..3 and x > 0.
///
/// K_0 and K_1 come from the ascending series for x < 2 and from Steed's
/// continued fraction (Temme's CF2) for x >= 2; K_2 and K_3 follow by
/// forward recurrence, which is stable for K.
double bessel_k_scaled(int order, double x);

/// e^x * K_nu(x) for nu = 0, 1, 2, 3 in one pass.
std::array<double, 4> bessel_k_scaled_all(double x);

/// log K_order(x). Finite for all x up to well beyond 1e6.
double log_bessel_k(int order, double x);

/// E_1(x) = int_1^inf e^{-xu}/u du.
double exp_integral_e1(double x);

/// e^x * E_n(x) for n >= 1, x > 0. Avoids the overflow of e^x and the
/// underflow of E_n(x) for large x.
double exp_integral_en_scaled(int n, double x);

}  // namespace specfun
}  // namespace bessreg
