#pragma once

#include "bessreg/regression.hpp"
#include "bessreg/rng.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace bessreg::sim {

enum class Generator { bessel, beta, beta_contaminated };
std::string to_string(Generator g);
Generator generator_from_string(const std::string& s);

/// Covariates: X = [1, Bernoulli(0.5), Uniform(-1,1)] cut to length(kappa);
/// V is a column of ones when length(lambda) = 1, otherwise an independent
/// draw of the same scheme.
struct Config {
    Generator generator = Generator::bessel;
    int n = 500;
    int replications = 200;
    Eigen::VectorXd kappa = (Eigen::VectorXd(3) << 0.5, -0.5, 1.0).finished();
    Eigen::VectorXd lambda = (Eigen::VectorXd(3) << 1.5, 1.0, -0.5).finished();
    double contamination_prob = 0.0;
    double contamination_mu = 0.2;
    double contamination_phi = 50.0;
    std::uint64_t seed = 1;
    /// Same X and V in every replication (drawn once from index 0).
    bool fixed_covariates = false;
    std::vector<Model> fit_models{Model::bessel, Model::beta};
    bool run_dbb = false;
    double level = 0.95;
    unsigned threads = 0;

    void validate() const;
};

/// Replication `rep`; depends only on (config, rep). `contaminated` receives
/// the per-row switch indicators.
Dataset gen_dataset(const Config& cfg, int rep, std::vector<char>* contaminated = nullptr);

struct ModelSummary {
    Model model = Model::bessel;
    Eigen::MatrixXd estimates;   // replications x (p+q), NaN rows for failures
    Eigen::MatrixXd std_errors;
    std::vector<char> converged;
    int failures = 0;
    // Over converged replications only.
    Eigen::VectorXd mean, bias, abs_rel_bias, mc_sd, mean_se, coverage;
};

struct Report {
    Config config;
    std::vector<ModelSummary> models;
    std::vector<std::optional<Model>> dbb_decisions;  // empty option = failure
    int dbb_failures = 0;
    double dbb_bessel_rate = 0.0;  // percent of successful replications
};

Report run_mc(const Config& cfg);

/// Mean over rows of |(estimate - truth) / truth|. Throws for a zero truth
/// entry (use the plain bias instead).
Eigen::VectorXd relative_bias(const Eigen::MatrixXd& estimates, const Eigen::VectorXd& truth);

}  // namespace bessreg::sim
