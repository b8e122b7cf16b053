#include "bessreg/specfun.hpp"

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/expint.hpp>
#include <doctest.h>

#include <cmath>

using namespace bessreg::specfun;

namespace {

// e^x K_nu(x), 30-digit references.
struct KRef {
    double x;
    double k[4];
};

constexpr KRef kTable[] = {
    {0.01, {4.7686940285444618845, 100.97864845824004908, 20200.498385676553857, 8080300.3329190796147}},
    {0.1, {2.6823261022628943375, 10.890182683049696015, 220.48597976325680255, 8830.3293732133213085}},
    {0.5, {1.52410938577390953, 2.7310097082117857054, 12.448148218621052351, 102.31619545718020452}},
    {1.5, {0.95821005329489649642, 1.2431658735525529948, 2.6157645513649671562, 8.2185380105257987445}},
    {2.0, {0.84156821507077141792, 1.0334768470686885732, 1.8750450621394599911, 4.7835669713476085554}},
    {2.5, {0.75954869032809957869, 0.90017442390787808913, 1.47968822945440205, 3.2676755910349213691}},
    {10.0, {0.39163193443659866573, 0.41076657059578875113, 0.47378524855575641596, 0.60028067001809131751}},
    {50.0, {0.17680715585742933811, 0.1785665585588155746, 0.1839498181997819611, 0.19328254401479813149}},
    {700.0, {0.047362369454613572112, 0.047396187653494544137, 0.047497787133623556524, 0.047667603579972393032}},
};

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("scaled K matches high-precision references") {
    for (const auto& r : kTable) {
        const auto all = bessel_k_scaled_all(r.x);
        for (int nu = 0; nu < 4; ++nu) {
            INFO("x = " << r.x << ", nu = " << nu);
            CHECK(rel(bessel_k_scaled(nu, r.x), r.k[nu]) < 1e-13);
            CHECK(rel(all[static_cast<std::size_t>(nu)], r.k[nu]) < 1e-13);
        }
    }
    CHECK(rel(bessel_k_scaled(1, 1.0), 1.6361534862632582465) < 1e-14);
    CHECK(rel(log_bessel_k(2, 5.0), -5.2383623877680452598) < 1e-14);
}

TEST_CASE("scaled K agrees with Boost on a log grid") {
    for (double lx = std::log(1e-6); lx <= std::log(600.0); lx += 0.05) {
        const double x = std::exp(lx);
        for (int nu = 0; nu < 4; ++nu) {
            const double ref = boost::math::cyl_bessel_k(nu, x) * std::exp(x);
            if (!std::isfinite(ref)) continue;
            INFO("x = " << x << ", nu = " << nu);
            CHECK(rel(bessel_k_scaled(nu, x), ref) < 5e-13);
        }
    }
}

TEST_CASE("K recurrence and derivative identities hold on a log grid") {
    for (double lx = std::log(1e-6); lx <= std::log(600.0); lx += 0.1) {
        const double x = std::exp(lx);
        const auto k = bessel_k_scaled_all(x);
        INFO("x = " << x);
        // K_{n+1} = K_{n-1} + (2n/x) K_n
        CHECK(rel(k[2], k[0] + 2.0 / x * k[1]) < 1e-13);
        CHECK(rel(k[3], k[1] + 4.0 / x * k[2]) < 1e-13);
        // K_0' = -K_1, so d/dx (e^x K_0) = e^x (K_0 - K_1)
        if (x > 1e-3) {
            const double h = 1e-5 * x;
            const double d = (bessel_k_scaled(0, x + h) - bessel_k_scaled(0, x - h)) / (2 * h);
            CHECK(std::abs(d - (k[0] - k[1])) < 1e-6 * std::max(1.0, std::abs(k[1])));
        }
    }
}

TEST_CASE("K is continuous across the series / continued-fraction switch") {
    for (int nu = 0; nu < 2; ++nu) {
        const double lo = bessel_k_scaled(nu, std::nextafter(2.0, 0.0));
        const double hi = bessel_k_scaled(nu, 2.0);
        CHECK(rel(lo, hi) < 1e-14);
    }
}

TEST_CASE("log K stays finite for large arguments") {
    for (double x : {1e3, 1e5, 1e6, 1e8}) {
        for (int nu = 0; nu < 4; ++nu) {
            const double v = log_bessel_k(nu, x);
            CHECK(std::isfinite(v));
            CHECK(v < -x + 1.0);
        }
    }
}

TEST_CASE("K rejects non-positive arguments and unknown orders") {
    CHECK_THROWS_AS(bessel_k_scaled(0, 0.0), bessreg::DomainError);
    CHECK_THROWS_AS(bessel_k_scaled(1, -1.0), bessreg::DomainError);
    CHECK_THROWS(bessel_k_scaled(4, 1.0));
}

TEST_CASE("E1 matches references") {
    CHECK(rel(exp_integral_e1(0.5), 0.55977359477616081175) < 1e-14);
    CHECK(rel(exp_integral_e1(1.0), 0.21938393439552027368) < 1e-14);
    CHECK(rel(exp_integral_e1(3.0), 0.013048381094197037413) < 1e-14);
    CHECK(rel(exp_integral_e1(5.0), 0.0011482955912753257973) < 1e-14);
    CHECK(rel(exp_integral_e1(20.0), 9.8355252906498816904e-11) < 1e-13);
}

TEST_CASE("E1 derivative is -e^{-x}/x") {
    for (double x : {0.01, 0.3, 1.0, 2.5, 7.0, 30.0}) {
        const double h = 1e-5 * x;
        const double d = (exp_integral_e1(x + h) - exp_integral_e1(x - h)) / (2 * h);
        CHECK(rel(d, -std::exp(-x) / x) < 1e-7);
    }
}

TEST_CASE("scaled E_n satisfies the upward recurrence and matches Boost") {
    for (double x : {0.05, 0.5, 1.0, 4.0, 40.0, 400.0}) {
        for (int n = 1; n < 4; ++n) {
            const double en = exp_integral_en_scaled(n, x);
            const double en1 = exp_integral_en_scaled(n + 1, x);
            // n E_{n+1} = e^{-x} - x E_n, scaled by e^x
            CHECK(rel(n * en1, 1.0 - x * en) < 1e-12 * std::max(1.0, x));
            if (x < 600) CHECK(rel(en, boost::math::expint(n, x) * std::exp(x)) < 1e-12);
        }
    }
}
