#include "bessreg/dbb.hpp"

#include "bessreg/distributions.hpp"
#include "bessreg/io.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <cmath>

using namespace bessreg;
using bessreg::sim::Generator;

TEST_CASE("decision rule: precheck dominates and ties go to bessel") {
    CHECK(dbb::decide(0.3, 0.2, 0.0, 1.0) == Model::beta);
    CHECK(dbb::decide(0.2, 0.2, 0.0, 1.0) == Model::beta);
    CHECK(dbb::decide(0.1, 0.2, 0.01, -0.01) == Model::bessel);
    CHECK(dbb::decide(0.1, 0.2, -0.02, 0.01) == Model::beta);
    CHECK(dbb::decide(0.1, 0.2, 0.0, 0.5) == Model::bessel);
}

TEST_CASE("intercept-only quasi-likelihood reproduces the sample mean") {
    const auto d = testing::simulated(Generator::beta, 200, 77);
    const auto io = testing::intercept_only(d.z);
    const double zbar = d.z.mean();
    for (auto w : {dbb::QlWeight::canonical, dbb::QlWeight::root_variance}) {
        const Eigen::VectorXd k = dbb::solve_ql(io, w);
        CHECK(k[0] == doctest::Approx(std::log(zbar / (1 - zbar))).epsilon(1e-8));
    }
}

TEST_CASE("quasi-score vanishes at the solution under either weight") {
    const auto d = testing::simulated(Generator::bessel, 300, 12);
    for (auto w : {dbb::QlWeight::canonical, dbb::QlWeight::root_variance}) {
        const Eigen::VectorXd k = dbb::solve_ql(d, w);
        CHECK(dbb::quasi_score(k, d, w).lpNorm<Eigen::Infinity>() < 1e-8 * d.n());
    }
    // The canonical equation is X'(z - mu) = 0.
    const Eigen::VectorXd k = dbb::solve_ql(d, dbb::QlWeight::canonical);
    const Eigen::VectorXd mu = (1.0 / (1.0 + (-(d.X * k).array()).exp())).matrix();
    CHECK((d.X.transpose() * (d.z - mu)).lpNorm<Eigen::Infinity>() < 1e-8 * d.n());
}

TEST_CASE("the two weights differ when covariates are present") {
    const auto d = testing::simulated(Generator::bessel, 300, 12);
    const Eigen::VectorXd a = dbb::solve_ql(d, dbb::QlWeight::canonical);
    const Eigen::VectorXd b = dbb::solve_ql(d, dbb::QlWeight::root_variance);
    CHECK((a - b).norm() > 1e-4);
}

TEST_CASE("report quantities are consistent") {
    const auto d = testing::simulated(Generator::bessel, 300, 41);
    const auto r = dbb::dbb_test(d);
    CHECK(r.mean_sq_response == doctest::Approx(d.z.squaredNorm() / 300.0));
    CHECK(r.variance_bound_sum == doctest::Approx(300.0 * r.variance_bound));
    REQUIRE_FALSE(r.precheck_beta);
    REQUIRE(r.d_bessel.has_value());
    REQUIRE(r.precision_bessel.has_value());
    CHECK(r.precision_bessel->converged);
    CHECK(r.precision_beta->converged);
    // D = T - mean(m g(phi) + mu^2) for the bessel fit
    const Eigen::ArrayXd mu = r.mu_tilde.array();
    double s = 0.0;
    for (Eigen::Index i = 0; i < d.n(); ++i) s += mu[i] * (1 - mu[i]) * g_bessel(r.precision_bessel->phi[i]) + mu[i] * mu[i];
    CHECK(*r.d_bessel == doctest::Approx(r.mean_sq_response - s / 300.0));
    CHECK(r.decision == dbb::decide(r.mean_sq_response, r.variance_bound, *r.d_bessel, *r.d_beta));
}

TEST_CASE("precheck short-circuits when the second moment exceeds the bound") {
    // Responses piled near 0 and 1 give sum z^2 / n above mean(mu(1-mu)/2 + mu^2).
    Eigen::VectorXd z(40);
    for (Eigen::Index i = 0; i < 40; ++i) z[i] = i % 2 ? 0.999 : 0.001;
    const auto r = dbb::dbb_test(testing::intercept_only(z));
    CHECK(r.precheck_beta);
    CHECK(r.decision == Model::beta);
    CHECK_FALSE(r.d_bessel.has_value());
    CHECK_FALSE(r.precision_bessel.has_value());
}

TEST_CASE("precision fit with known means recovers the precision") {
    const auto d = testing::simulated(Generator::bessel, 2000, 5);
    sim::Config cfg;
    const Eigen::VectorXd mu = (1.0 / (1.0 + (-(d.X * cfg.kappa).array()).exp())).matrix();
    const auto pf = dbb::fit_precision_fixed_mu(d, mu, Model::bessel);
    CHECK(pf.converged);
    CHECK_FALSE(pf.boundary);
    CHECK((pf.lambda - cfg.lambda).lpNorm<Eigen::Infinity>() < 0.25);
}
