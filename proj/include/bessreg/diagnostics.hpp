#pragma once

#include "bessreg/regression.hpp"
#include "bessreg/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace bessreg::diag {

/// (z - mu) / sqrt(mu (1 - mu) g(phi)) with g chosen by the fit's model.
Eigen::VectorXd pearson_residuals(const FitResult& fit, const Dataset& data);

/// Phi^{-1}(F(z)) with F the fitted CDF. CDF values are clamped to
/// [1e-12, 1 - 1e-12] first; `clamped` receives the count.
Eigen::VectorXd quantile_residuals(const FitResult& fit, const Dataset& data, std::size_t* clamped = nullptr);

enum class ResidualKind { pearson, quantile };
std::string to_string(ResidualKind k);
ResidualKind residual_kind_from_string(const std::string& s);

Eigen::VectorXd residuals(ResidualKind kind, const FitResult& fit, const Dataset& data);

/// Draw of a response vector from the fitted model at the data's covariates.
/// Draws are kept inside [1e-9, 1 - 1e-9]; `clamped` receives the count moved.
Eigen::VectorXd simulate_response(const FitResult& fit, const Dataset& data, Rng& rng,
                                  std::size_t* clamped = nullptr);

struct EnvelopeOptions {
    int replications = 1000;
    double coverage = 0.95;
    ResidualKind kind = ResidualKind::pearson;
    std::uint64_t seed = 0;
    unsigned threads = 0;
};

struct EnvelopeResult {
    Eigen::VectorXd observed;     // sorted residuals of the fitted data
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
    Eigen::VectorXd mean;
    Eigen::VectorXd theoretical;  // Blom positions (i - 3/8)/(n + 1/4)
    double coverage_pct = 0.0;
    int replications = 0;         // surviving replications B'
    int dropped = 0;
    int retried = 0;
    std::size_t simulated_clamped = 0;
    int lower_row = 0;            // 1-based rows of the column-sorted matrix
    int upper_row = 0;
    Model model = Model::bessel;
    ResidualKind kind = ResidualKind::pearson;
};

/// Band rows ceil(B(1-c)/2) and floor(B(1+c)/2), 1-based, kept inside [1, B].
std::pair<int, int> band_rows(int replications, double coverage);

EnvelopeResult simulated_envelope(const FitResult& fit, const Dataset& data, const EnvelopeOptions& opts);

struct CvOptions {
    int test_size = 10;
    int partitions = 1000;
    std::uint64_t seed = 0;
    unsigned threads = 0;
};

struct CvResult {
    std::vector<int> partition;  // surviving partition indices
    std::vector<double> rss_bessel, rss_beta;
    std::vector<double> fsmd_bessel, fsmd_beta;
    std::vector<double> rss_ratio, fsmd_ratio;  // bessel / beta
    /// Hash of the held-out index set seen by each model, per partition.
    std::vector<std::uint64_t> split_hash_bessel, split_hash_beta;
    int test_size = 0;
    std::uint64_t seed = 0;
    int dropped = 0;
};

/// Held-out rows of partition k (sorted), depending only on (seed, k, n).
std::vector<Eigen::Index> test_rows(std::uint64_t seed, int k, Eigen::Index n, int test_size);

std::uint64_t split_hash(const std::vector<Eigen::Index>& rows);

/// Sum of squared Pearson residuals and sum of |z - E Z| + |z^2 - E Z^2|
/// of `test` under a fit.
double rss(const FitResult& fit, const Dataset& test);
double fsmd(const FitResult& fit, const Dataset& test);

CvResult cross_validate(const Dataset& data, const CvOptions& opts);

/// Share of entries strictly below one.
double fraction_below_one(const std::vector<double>& ratios);

struct VifStep {
    std::string removed;
    double vif;  // +inf for an exactly collinear (or constant) column
    bool infinite;
};

struct VifResult {
    std::vector<std::string> kept;
    std::vector<VifStep> trace;
    std::vector<double> final_vif;  // aligned with kept
};

/// VIF_j = 1/(1 - R_j^2) from regressing column j (with intercept) on the
/// remaining columns; repeatedly drops the largest VIF >= threshold.
std::vector<double> vif(const Eigen::MatrixXd& columns);
VifResult vif_select(const Eigen::MatrixXd& columns, const std::vector<std::string>& names, double threshold = 5.0);

}  // namespace bessreg::diag
