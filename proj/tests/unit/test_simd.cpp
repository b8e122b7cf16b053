#include "bessreg/simd/kernels.hpp"

#include "bessreg/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace bessreg;

namespace {

struct Inputs {
    std::vector<double> eta, log_phi, z, psi;
};

Inputs make_inputs(std::size_t n) {
    auto rng = make_stream(42, n, StreamTag::response);
    std::uniform_real_distribution<double> e(-30.0, 30.0), l(-5.0, 9.0), u(1e-9, 1 - 1e-9), p(0.0, 50.0);
    Inputs in;
    for (std::size_t i = 0; i < n; ++i) {
        in.eta.push_back(e(rng));
        in.log_phi.push_back(l(rng));
        in.z.push_back(u(rng));
        in.psi.push_back(p(rng));
    }
    return in;
}

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)}); }

}  // namespace

TEST_CASE("AVX2 kernels agree with the scalar reference") {
    if (!simd::isa_available(simd::Isa::avx2)) {
        MESSAGE("AVX2 not available on this host; equivalence not exercised");
        return;
    }
    // Odd lengths exercise the scalar tails of the vector loops.
    for (std::size_t n : {1u, 3u, 4u, 7u, 64u, 1001u}) {
        const auto in = make_inputs(n);
        std::vector<double> mu_s(n), phi_s(n), mu_v(n), phi_v(n);
        simd::scalar::inverse_links(in.eta, in.log_phi, mu_s, phi_s);
        simd::avx2::inverse_links(in.eta, in.log_phi, mu_v, phi_v);
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(close(mu_s[i], mu_v[i], 1e-14));
            CHECK(close(phi_s[i], phi_v[i], 1e-14));
            CHECK(mu_v[i] > 0.0);
            CHECK(mu_v[i] < 1.0);
        }

        std::vector<double> wk_s(n), wl_s(n), wk_v(n), wl_v(n);
        const double qs = simd::scalar::q_terms(in.eta, in.log_phi, in.z, in.psi, wk_s, wl_s);
        const double qv = simd::avx2::q_terms(in.eta, in.log_phi, in.z, in.psi, wk_v, wl_v);
        CHECK(close(qs, qv, 1e-12));
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(close(wk_s[i], wk_v[i], 1e-12));
            CHECK(close(wl_s[i], wl_v[i], 1e-12));
        }
    }
}

TEST_CASE("dispatch honours forced ISA") {
    const auto before = simd::active_isa();
    simd::force_isa(simd::Isa::scalar);
    CHECK(simd::active_isa() == simd::Isa::scalar);
    CHECK(simd::isa_name(simd::Isa::scalar) == "scalar");
    const auto in = make_inputs(9);
    std::vector<double> wk(9), wl(9), wk2(9), wl2(9);
    const double a = simd::q_terms(in.eta, in.log_phi, in.z, in.psi, wk, wl);
    const double b = simd::scalar::q_terms(in.eta, in.log_phi, in.z, in.psi, wk2, wl2);
    CHECK(a == b);
    if (simd::isa_available(simd::Isa::avx2)) {
        simd::force_isa(simd::Isa::avx2);
        CHECK(simd::active_isa() == simd::Isa::avx2);
    }
    simd::force_isa(before);
}

TEST_CASE("scalar kernel matches its defining formula") {
    const double eta = 0.4, lp = 1.2, z = 0.3, psi = 0.8;
    const double mu = 1 / (1 + std::exp(-eta)), phi = std::exp(lp);
    const double A = mu * mu / z + (1 - mu) * (1 - mu) / (1 - z);
    double wk = 0, wl = 0;
    const double q = simd::scalar::q_terms({&eta, 1}, {&lp, 1}, {&z, 1}, {&psi, 1}, {&wk, 1}, {&wl, 1});
    CHECK(q == doctest::Approx(std::log(mu) + std::log(1 - mu) + 2 * lp + phi - psi * phi * phi * A / 2));
    CHECK(wk == doctest::Approx(1 - 2 * mu + psi * phi * phi * mu * (1 - mu) * (z - mu) / (z * (1 - z))));
    CHECK(wl == doctest::Approx(2 + phi - psi * phi * phi * A));
}
