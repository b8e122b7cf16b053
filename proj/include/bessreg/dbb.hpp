#pragma once

#include "bessreg/regression.hpp"

#include <optional>

namespace bessreg::dbb {

/// Weight w(mu) in U(kappa) = sum_i (z_i - mu_i) w(mu_i) x_i.
/// canonical: w = 1, the quasi-likelihood equation for variance mu(1-mu)
/// under the logit link. root_variance: w = sqrt(mu(1-mu)).
enum class QlWeight { canonical, root_variance };

Eigen::VectorXd quasi_score(const Eigen::VectorXd& kappa, const Dataset& data,
                            QlWeight weight = QlWeight::canonical);

/// Root of quasi_score by damped Newton on a central-difference Jacobian,
/// started from the OLS-on-logit coefficients. Throws std::runtime_error
/// with the residual norm if no start reaches ||U||_inf <= 1e-10 n.
Eigen::VectorXd solve_ql(const Dataset& data, QlWeight weight = QlWeight::canonical);

struct PrecisionFit {
    Eigen::VectorXd lambda;
    Eigen::VectorXd phi;
    bool converged = false;
    /// Set when the optimum runs off to |lambda| > 30 (flat likelihood).
    bool boundary = false;
};

/// Maximises the model likelihood over lambda with every mu_i frozen.
PrecisionFit fit_precision_fixed_mu(const Dataset& data, const Eigen::VectorXd& mu, Model model);

struct Report {
    double mean_sq_response = 0.0;    // T = sum z^2 / n
    double variance_bound = 0.0;      // B = mean of mu(1-mu)/2 + mu^2
    double variance_bound_sum = 0.0;  // n B
    bool precheck_beta = false;       // T >= B
    std::optional<double> d_bessel;
    std::optional<double> d_beta;
    Model decision = Model::bessel;
    QlWeight weight = QlWeight::canonical;
    Eigen::VectorXd kappa_tilde;
    Eigen::VectorXd mu_tilde;
    std::optional<PrecisionFit> precision_bessel;
    std::optional<PrecisionFit> precision_beta;
};

/// The decision rule alone: beta when T >= B, otherwise the smaller |D|
/// with ties going to bessel.
Model decide(double mean_sq_response, double variance_bound, double d_bessel, double d_beta);

Report dbb_test(const Dataset& data, QlWeight weight = QlWeight::canonical);

}  // namespace bessreg::dbb
