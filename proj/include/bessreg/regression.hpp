#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace bessreg {

enum class Model { bessel, beta };

std::string to_string(Model m);
Model model_from_string(const std::string& s);

/// Responses z in (0,1) with mean design X (n x p) and precision design V
/// (n x q). The links are logit(mu_i) = x_i'kappa + offset_i and
/// log(phi_i) = v_i'lambda.
struct Dataset {
    Eigen::VectorXd z;
    Eigen::MatrixXd X;
    Eigen::MatrixXd V;
    /// Optional fixed term on the mean linear predictor (empty = zero). With
    /// p = 0 it freezes every mu_i, which is how precision-only fits are run.
    Eigen::VectorXd mean_offset;
    std::vector<std::string> mean_names;
    std::vector<std::string> precision_names;

    Eigen::Index n() const { return z.size(); }
    Eigen::Index p() const { return X.cols(); }
    Eigen::Index q() const { return V.cols(); }

    /// Throws std::invalid_argument on shape mismatch, responses outside
    /// (1e-10, 1 - 1e-10), or p + q >= n.
    void validate() const;

    /// Rows `idx` only (names and offsets carried along).
    Dataset subset(const std::vector<Eigen::Index>& idx) const;
};

struct Theta {
    Eigen::VectorXd kappa;
    Eigen::VectorXd lambda;

    Eigen::VectorXd packed() const;
    static Theta unpack(const Eigen::VectorXd& v, Eigen::Index p);
};

/// Per-observation means and precisions at theta.
struct LinkedParams {
    Eigen::VectorXd mu;
    Eigen::VectorXd phi;
};
LinkedParams linked_params(const Theta& theta, const Dataset& data);

struct FitResult {
    Model model = Model::bessel;
    Theta theta;
    Eigen::VectorXd std_errors;
    Eigen::MatrixXd observed_information;
    double loglik = 0.0;
    int em_iterations = 0;
    std::vector<double> loglik_trace;
    bool converged = false;
    /// False when the information matrix is not positive definite (flat or
    /// boundary likelihood); std_errors are then NaN where undefined.
    bool information_pd = true;
};

struct EmOptions {
    double epsilon = 1e-5;   // relative change ||theta_new - theta|| / ||theta||
    int max_iter = 10000;
    double inner_grad_tol = 1e-8;
    int inner_max_iter = 200;
    bool compute_information = true;
};

// ---- bessel model -------------------------------------------------------

/// Exact log-likelihood (all normalising constants included).
double loglik_bessel(const Theta& theta, const Dataset& data);

struct EStep {
    Eigen::VectorXd psi;  // E(1/W | z)
    Eigen::VectorXd chi;  // E(1/W^2 | z)
};

/// Conditional moments of the latent W_i ~ GIG(1, phi^2 zeta^2, -1) given z_i.
EStep e_step(const Theta& theta, const Dataset& data);

/// EM Q-function (up to theta-free constants) with psi held fixed.
double q_function(const Theta& theta, const Eigen::VectorXd& psi, const Dataset& data);

/// Gradient of q_function, packed as (kappa, lambda).
Eigen::VectorXd q_score(const Theta& theta, const Eigen::VectorXd& psi, const Dataset& data);

/// -d^2 Q / d theta d theta' with psi held fixed.
Eigen::MatrixXd q_neg_hessian(const Theta& theta, const Eigen::VectorXd& psi, const Dataset& data);

/// Starting values from the auxiliary regression of logit(z) on X.
Theta default_init(const Dataset& data, Model model);

FitResult fit_bessel_em(const Dataset& data, const std::optional<Theta>& init = std::nullopt,
                        const EmOptions& opts = {});

/// Louis observed information at theta from the conditional complete-data
/// Hessian and score outer product.
Eigen::MatrixXd louis_information(const Theta& theta, const Dataset& data);

// ---- beta model ---------------------------------------------------------

double loglik_beta(const Theta& theta, const Dataset& data);
Eigen::VectorXd score_beta(const Theta& theta, const Dataset& data);

struct BetaOptions {
    double grad_tol = 1e-8;
    int max_iter = 1000;
    bool compute_information = true;
};

/// Direct maximum likelihood; standard errors from the central-difference
/// Hessian of the analytic score.
FitResult fit_beta_ml(const Dataset& data, const std::optional<Theta>& init = std::nullopt,
                      const BetaOptions& opts = {});

/// Fits `model` with default options.
FitResult fit_model(Model model, const Dataset& data, const std::optional<Theta>& init = std::nullopt);

// ---- inference ----------------------------------------------------------

struct WaldRow {
    std::string name;
    double estimate;
    double se;
    double z;
    double p_value;
    double ci_lo;
    double ci_hi;
};

/// Wald table for a fit. Throws std::runtime_error naming the column most
/// involved in a singular information matrix.
std::vector<WaldRow> wald_inference(const FitResult& fit, const Dataset& data, double level = 0.95);

/// One Wald row from an estimate and its standard error.
WaldRow wald_row(std::string name, double estimate, double se, double level = 0.95);

/// Standard errors sqrt(diag(I^{-1})); sets *pd to false if I is not
/// positive definite.
Eigen::VectorXd standard_errors(const Eigen::MatrixXd& info, bool* pd = nullptr);

}  // namespace bessreg
