#include "bessreg/dbb.hpp"

#include "bessreg/distributions.hpp"

#include <cmath>
#include <stdexcept>

namespace bessreg::dbb {
namespace {

double logistic(double x) {
    return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

Eigen::VectorXd means(const Eigen::VectorXd& kappa, const Dataset& data) {
    Eigen::VectorXd eta = data.X * kappa;
    if (data.mean_offset.size() != 0) eta += data.mean_offset;
    return eta.unaryExpr([](double e) { return logistic(e); });
}

Eigen::MatrixXd jacobian(const Eigen::VectorXd& kappa, const Dataset& data, QlWeight weight) {
    const Eigen::Index p = kappa.size();
    Eigen::MatrixXd jac(p, p);
    for (Eigen::Index k = 0; k < p; ++k) {
        const double h = 1e-6 * std::max(1.0, std::abs(kappa[k]));
        Eigen::VectorXd kp = kappa, km = kappa;
        kp[k] += h;
        km[k] -= h;
        jac.col(k) = (quasi_score(kp, data, weight) - quasi_score(km, data, weight)) / (2.0 * h);
    }
    return jac;
}

// Damped Newton from `start`; returns the final residual max-norm.
double newton(const Dataset& data, Eigen::VectorXd& kappa, double tol, QlWeight weight) {
    Eigen::VectorXd u = quasi_score(kappa, data, weight);
    double norm = u.lpNorm<Eigen::Infinity>();
    for (int it = 0; it < 100 && norm > tol; ++it) {
        const Eigen::VectorXd step = jacobian(kappa, data, weight).colPivHouseholderQr().solve(-u);
        if (!step.allFinite()) break;
        double t = 1.0;
        bool moved = false;
        for (int h = 0; h < 40; ++h, t *= 0.5) {
            const Eigen::VectorXd trial = kappa + t * step;
            const Eigen::VectorXd ut = quasi_score(trial, data, weight);
            const double nt = ut.lpNorm<Eigen::Infinity>();
            if (std::isfinite(nt) && nt < norm) {
                kappa = trial;
                u = ut;
                norm = nt;
                moved = true;
                break;
            }
        }
        if (!moved) break;
    }
    return norm;
}

}  // namespace

Eigen::VectorXd quasi_score(const Eigen::VectorXd& kappa, const Dataset& data, QlWeight weight) {
    const Eigen::VectorXd mu = means(kappa, data);
    Eigen::VectorXd w(data.n());
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        w[i] = data.z[i] - mu[i];
        if (weight == QlWeight::root_variance) w[i] *= std::sqrt(mu[i] * (1.0 - mu[i]));
    }
    return data.X.transpose() * w;
}

Eigen::VectorXd solve_ql(const Dataset& data, QlWeight weight) {
    const double tol = 1e-10 * static_cast<double>(data.n());
    std::vector<Eigen::VectorXd> starts{default_init(data, Model::beta).kappa,
                                        Eigen::VectorXd::Zero(data.p())};
    double best = std::numeric_limits<double>::infinity();
    for (auto& k : starts) {
        const double r = newton(data, k, tol, weight);
        if (r <= tol) return k;
        best = std::min(best, r);
    }
    throw std::runtime_error("quasi-likelihood Newton failed; residual max-norm " + std::to_string(best));
}

PrecisionFit fit_precision_fixed_mu(const Dataset& data, const Eigen::VectorXd& mu, Model model) {
    Dataset fixed;
    fixed.z = data.z;
    fixed.V = data.V;
    fixed.X.resize(data.n(), 0);
    fixed.mean_offset = mu.unaryExpr([](double m) { return std::log(m / (1.0 - m)); });
    fixed.precision_names = data.precision_names;

    PrecisionFit out;
    FitResult fit;
    if (model == Model::bessel) {
        EmOptions o;
        o.compute_information = false;
        fit = fit_bessel_em(fixed, std::nullopt, o);
    } else {
        BetaOptions o;
        o.compute_information = false;
        fit = fit_beta_ml(fixed, std::nullopt, o);
    }
    out.lambda = fit.theta.lambda;
    out.phi = (data.V * out.lambda).array().exp().matrix();
    out.converged = fit.converged;
    out.boundary = !out.lambda.allFinite() || out.lambda.lpNorm<Eigen::Infinity>() > 30.0;
    return out;
}

Model decide(double mean_sq_response, double variance_bound, double d_bessel, double d_beta) {
    if (mean_sq_response >= variance_bound) return Model::beta;
    return std::abs(d_bessel) <= std::abs(d_beta) ? Model::bessel : Model::beta;
}

Report dbb_test(const Dataset& data, QlWeight weight) {
    data.validate();
    Report r;
    r.weight = weight;
    const double n = static_cast<double>(data.n());
    r.kappa_tilde = solve_ql(data, weight);
    r.mu_tilde = means(r.kappa_tilde, data);
    r.mean_sq_response = data.z.squaredNorm() / n;

    const Eigen::ArrayXd mu = r.mu_tilde.array();
    const Eigen::ArrayXd m = mu * (1.0 - mu);
    r.variance_bound_sum = (0.5 * m + mu.square()).sum();
    r.variance_bound = r.variance_bound_sum / n;
    if (r.mean_sq_response >= r.variance_bound) {
        r.precheck_beta = true;
        r.decision = Model::beta;
        return r;
    }

    auto d_stat = [&](const PrecisionFit& pf, double (*g)(double)) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < data.n(); ++i) s += m[i] * g(pf.phi[i]) + mu[i] * mu[i];
        return r.mean_sq_response - s / n;
    };
    r.precision_bessel = fit_precision_fixed_mu(data, r.mu_tilde, Model::bessel);
    r.precision_beta = fit_precision_fixed_mu(data, r.mu_tilde, Model::beta);
    r.d_bessel = d_stat(*r.precision_bessel, g_bessel);
    r.d_beta = d_stat(*r.precision_beta, g_beta);
    r.decision = decide(r.mean_sq_response, r.variance_bound, *r.d_bessel, *r.d_beta);
    return r;
}

}  // namespace bessreg::dbb
