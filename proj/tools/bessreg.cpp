// bessreg: command-line front end for bessel and beta regression.

#include "bessreg/dbb.hpp"
#include "bessreg/diagnostics.hpp"
#include "bessreg/io.hpp"
#include "bessreg/regression.hpp"
#include "bessreg/report.hpp"
#include "bessreg/simstudy.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#ifndef BESSREG_VERSION
#define BESSREG_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using bessreg::report::Json;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DataArgs {
    std::string path;
    std::string response;
    std::vector<std::string> mean;
    std::vector<std::string> precision;
    bool no_mean_intercept = false;
    bool no_precision_intercept = false;
    std::vector<double> rescale;
    double response_divisor = 1.0;
    double covariate_divisor = 1.0;
    std::vector<std::size_t> exclude_rows;
    std::optional<double> clamp_eps;
};

struct CommonArgs {
    std::string out;
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;
};

void add_data_options(CLI::App* cmd, DataArgs& d) {
    cmd->add_option("--data", d.path, "CSV file with a header row")->required()->check(CLI::ExistingFile);
    cmd->add_option("--response", d.response, "response column")->required();
    cmd->add_option("--mean", d.mean, "mean covariates")->delimiter(',');
    cmd->add_option("--precision", d.precision, "precision covariates")->delimiter(',');
    cmd->add_flag("--no-mean-intercept", d.no_mean_intercept);
    cmd->add_flag("--no-precision-intercept", d.no_precision_intercept);
    cmd->add_option("--rescale", d.rescale, "MIN,MAX: map the response to (y - MIN)/(MAX - MIN)")
        ->delimiter(',')
        ->expected(2);
    cmd->add_option("--response-divisor", d.response_divisor)->check(CLI::PositiveNumber);
    cmd->add_option("--covariate-divisor", d.covariate_divisor)->check(CLI::PositiveNumber);
    cmd->add_option("--exclude-rows", d.exclude_rows, "1-based data rows to drop")->delimiter(',');
    cmd->add_option("--clamp-eps", d.clamp_eps, "move responses outside (eps, 1-eps) to the bound");
}

void add_common_options(CLI::App* cmd, CommonArgs& c, bool stochastic) {
    cmd->add_option("--out", c.out, "output directory (default $BESSREG_OUT, else bessreg-out)");
    cmd->add_option("--threads", c.threads, "worker threads (0 = hardware)");
    if (stochastic) cmd->add_option("--seed", c.seed, "RNG seed")->required();
}

bessreg::io::Roles roles_of(const DataArgs& d) {
    bessreg::io::Roles r;
    r.response = d.response;
    r.mean = d.mean;
    r.precision = d.precision;
    r.mean_intercept = !d.no_mean_intercept;
    r.precision_intercept = !d.no_precision_intercept;
    if (!d.rescale.empty()) r.rescale = std::make_pair(d.rescale[0], d.rescale[1]);
    r.response_divisor = d.response_divisor;
    r.covariate_divisor = d.covariate_divisor;
    r.exclude_rows = d.exclude_rows;
    r.clamp_eps = d.clamp_eps;
    return r;
}

Json roles_json(const DataArgs& d) {
    Json j = {{"response", d.response},
              {"mean", d.mean},
              {"precision", d.precision},
              {"mean_intercept", !d.no_mean_intercept},
              {"precision_intercept", !d.no_precision_intercept},
              {"response_divisor", d.response_divisor},
              {"covariate_divisor", d.covariate_divisor},
              {"exclude_rows", d.exclude_rows}};
    j["rescale"] = d.rescale.empty() ? Json(nullptr) : Json(d.rescale);
    j["clamp_eps"] = d.clamp_eps ? Json(*d.clamp_eps) : Json(nullptr);
    return j;
}

std::string resolve_out(const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("BESSREG_OUT"); env && *env) return env;
    return "bessreg-out";
}

// Paths are recorded as given so that identical invocations produce
// identical manifests regardless of the working directory.
Json manifest(const std::string& subcommand, const Json& inputs, const Json& roles, const CommonArgs& c,
              const std::string& out_dir, const Json& tolerances) {
    return {{"tool", "bessreg"},
            {"version", BESSREG_VERSION},
            {"subcommand", subcommand},
            {"inputs", inputs},
            {"roles", roles},
            {"links", {{"mean", "logit"}, {"precision", "log"}}},
            {"seed", c.seed ? Json(*c.seed) : Json(nullptr)},
            {"threads", c.threads},
            {"tolerances", tolerances},
            {"output_dir", out_dir}};
}

Json data_json(const bessreg::io::Ingested& in) {
    return {{"n", in.data.n()},
            {"p", in.data.p()},
            {"q", in.data.q()},
            {"clamped", in.clamped},
            {"mean_columns", in.data.mean_names},
            {"precision_columns", in.data.precision_names}};
}

std::vector<bessreg::Model> models_of(const std::string& s) {
    if (s == "both") return {bessreg::Model::bessel, bessreg::Model::beta};
    return {bessreg::model_from_string(s)};
}

Json tolerances_em() { return {{"em_epsilon", 1e-5}, {"inner_grad_tol", 1e-8}, {"beta_grad_tol", 1e-8}}; }

bessreg::FitResult fit_with(bessreg::Model m, const bessreg::Dataset& data, double epsilon) {
    if (m == bessreg::Model::bessel) {
        bessreg::EmOptions o;
        o.epsilon = epsilon;
        return bessreg::fit_bessel_em(data, std::nullopt, o);
    }
    return bessreg::fit_beta_ml(data);
}

void print_fit(const bessreg::FitResult& fit, const bessreg::Dataset& data, double level) {
    std::printf("%s model: loglik %.6f, %s after %d iterations\n", bessreg::to_string(fit.model).c_str(), fit.loglik,
                fit.converged ? "converged" : "NOT converged", fit.em_iterations);
    std::printf("  %-28s %12s %10s %9s %10s\n", "coefficient", "estimate", "se", "z", "p");
    for (const auto& r : bessreg::wald_inference(fit, data, level)) {
        std::printf("  %-28s %12.6f %10.6f %9.3f %10.3g\n", r.name.c_str(), r.estimate, r.se, r.z, r.p_value);
    }
}

int run_fit(const DataArgs& d, const CommonArgs& c, const std::string& model, double epsilon, double level) {
    const auto in = bessreg::io::ingest_csv(d.path, roles_of(d));
    const std::string out = resolve_out(c.out);
    fs::create_directories(out);

    Json tol = tolerances_em();
    tol["em_epsilon"] = epsilon;
    Json fits = Json::array();
    bessreg::report::CsvWriter coef(out + "/detail_coefficients.csv",
                                    {"model", "name", "estimate", "se", "z", "p_value", "ci_lo", "ci_hi"});
    bessreg::report::CsvWriter fitted(out + "/detail_fitted.csv",
                                      {"model", "row", "z", "mu", "phi", "pearson", "quantile"});
    for (auto m : models_of(model)) {
        const auto fit = fit_with(m, in.data, epsilon);
        fits.push_back(bessreg::report::fit_json(fit, in.data, level));
        print_fit(fit, in.data, level);
        const std::string name = bessreg::to_string(m);
        for (const auto& r : bessreg::wald_inference(fit, in.data, level)) {
            coef.cell(name).cell(r.name).cell(r.estimate).cell(r.se).cell(r.z).cell(r.p_value).cell(r.ci_lo).cell(r.ci_hi);
            coef.end_row();
        }
        const auto lp = bessreg::linked_params(fit.theta, in.data);
        const auto pr = bessreg::diag::pearson_residuals(fit, in.data);
        const auto qr = bessreg::diag::quantile_residuals(fit, in.data);
        for (Eigen::Index i = 0; i < in.data.n(); ++i) {
            fitted.cell(name).cell(static_cast<long long>(in.kept_rows[i])).cell(in.data.z[i]).cell(lp.mu[i]);
            fitted.cell(lp.phi[i]).cell(pr[i]).cell(qr[i]);
            fitted.end_row();
        }
        if (!fit.loglik_trace.empty()) {
            bessreg::report::CsvWriter trace(out + "/plotdata_loglik_" + name + ".csv", {"iteration", "loglik"});
            for (std::size_t k = 0; k < fit.loglik_trace.size(); ++k) {
                trace.cell(static_cast<long long>(k)).cell(fit.loglik_trace[k]);
                trace.end_row();
            }
        }
    }
    const Json results = {{"data", data_json(in)}, {"fits", fits}};
    bessreg::report::write_json(out + "/summary.json",
                                bessreg::report::summary(manifest("fit", {{"data", d.path}}, roles_json(d), c, out, tol),
                                                         results));
    return 0;
}

int run_dbb(const DataArgs& d, const CommonArgs& c, const std::string& weight) {
    const auto in = bessreg::io::ingest_csv(d.path, roles_of(d));
    bessreg::dbb::QlWeight w;
    if (weight == "canonical") {
        w = bessreg::dbb::QlWeight::canonical;
    } else if (weight == "root-variance") {
        w = bessreg::dbb::QlWeight::root_variance;
    } else {
        throw UsageError("unknown --ql-weight '" + weight + "' (canonical, root-variance)");
    }
    const auto r = bessreg::dbb::dbb_test(in.data, w);
    const std::string out = resolve_out(c.out);
    fs::create_directories(out);

    std::printf("T = %.6f  B = %.6f  (n B = %.5f)\n", r.mean_sq_response, r.variance_bound, r.variance_bound_sum);
    if (r.precheck_beta) {
        std::printf("T >= B: beta selected without precision fits\n");
    } else {
        std::printf("|D_bessel| = %.6f  |D_beta| = %.6f\n", r.d_bessel ? std::abs(*r.d_bessel) : NAN,
                    r.d_beta ? std::abs(*r.d_beta) : NAN);
    }
    std::printf("decision: %s\n", bessreg::to_string(r.decision).c_str());

    bessreg::report::CsvWriter rows(out + "/detail_dbb.csv", {"row", "z", "mu_tilde"});
    for (Eigen::Index i = 0; i < in.data.n(); ++i) {
        rows.cell(static_cast<long long>(in.kept_rows[i])).cell(in.data.z[i]).cell(r.mu_tilde[i]);
        rows.end_row();
    }
    const Json tol = {{"ql_tolerance_per_row", 1e-10}, {"precision_grad_tol", 1e-8}};
    Json inputs = {{"data", d.path}, {"ql_weight", weight}};
    bessreg::report::write_json(
        out + "/summary.json",
        bessreg::report::summary(manifest("dbb", inputs, roles_json(d), c, out, tol),
                                 {{"data", data_json(in)}, {"dbb", bessreg::report::dbb_json(r)}}));
    return 0;
}

int run_envelope(const DataArgs& d, const CommonArgs& c, const std::string& model, int reps, double coverage,
                 const std::string& residual) {
    const auto in = bessreg::io::ingest_csv(d.path, roles_of(d));
    const std::string out = resolve_out(c.out);
    fs::create_directories(out);

    Json envs = Json::array();
    for (auto m : models_of(model)) {
        const auto fit = bessreg::fit_model(m, in.data);
        bessreg::diag::EnvelopeOptions o;
        o.replications = reps;
        o.coverage = coverage;
        o.kind = bessreg::diag::residual_kind_from_string(residual);
        o.seed = *c.seed;
        o.threads = c.threads;
        const auto e = bessreg::diag::simulated_envelope(fit, in.data, o);
        envs.push_back(bessreg::report::envelope_json(e));
        std::printf("%s %s residuals: %.2f%% inside the %.0f%% envelope (B' = %d, dropped %d)\n",
                    bessreg::to_string(m).c_str(), residual.c_str(), e.coverage_pct, 100.0 * coverage,
                    e.replications, e.dropped);
        bessreg::report::CsvWriter p(out + "/plotdata_envelope_" + bessreg::to_string(m) + ".csv",
                                     {"index", "theoretical", "observed", "lower", "mean", "upper"});
        for (Eigen::Index i = 0; i < e.observed.size(); ++i) {
            p.cell(static_cast<long long>(i + 1)).cell(e.theoretical[i]).cell(e.observed[i]).cell(e.lower[i]);
            p.cell(e.mean[i]).cell(e.upper[i]);
            p.end_row();
        }
    }
    Json inputs = {{"data", d.path}, {"model", model}, {"replications", reps}, {"coverage", coverage},
                   {"residual", residual}};
    bessreg::report::write_json(
        out + "/summary.json",
        bessreg::report::summary(manifest("envelope", inputs, roles_json(d), c, out, tolerances_em()),
                                 {{"data", data_json(in)}, {"envelopes", envs}}));
    return 0;
}

int run_cv(const DataArgs& d, const CommonArgs& c, int partitions, int test_size) {
    const auto in = bessreg::io::ingest_csv(d.path, roles_of(d));
    const std::string out = resolve_out(c.out);
    fs::create_directories(out);

    bessreg::diag::CvOptions o;
    o.partitions = partitions;
    o.test_size = test_size;
    o.seed = *c.seed;
    o.threads = c.threads;
    const auto cv = bessreg::diag::cross_validate(in.data, o);
    std::printf("RSS_bessel < RSS_beta in %.1f%% of %zu partitions\n",
                100.0 * bessreg::diag::fraction_below_one(cv.rss_ratio), cv.partition.size());
    std::printf("FSMD_bessel < FSMD_beta in %.1f%% of %zu partitions\n",
                100.0 * bessreg::diag::fraction_below_one(cv.fsmd_ratio), cv.partition.size());

    bessreg::report::CsvWriter w(out + "/detail_cv.csv",
                                 {"partition", "rss_bessel", "rss_beta", "rss_ratio", "fsmd_bessel", "fsmd_beta",
                                  "fsmd_ratio", "split_hash_bessel", "split_hash_beta"});
    for (std::size_t k = 0; k < cv.partition.size(); ++k) {
        w.cell(static_cast<long long>(cv.partition[k])).cell(cv.rss_bessel[k]).cell(cv.rss_beta[k]);
        w.cell(cv.rss_ratio[k]).cell(cv.fsmd_bessel[k]).cell(cv.fsmd_beta[k]).cell(cv.fsmd_ratio[k]);
        char h[2][20];
        std::snprintf(h[0], sizeof h[0], "%016llx", static_cast<unsigned long long>(cv.split_hash_bessel[k]));
        std::snprintf(h[1], sizeof h[1], "%016llx", static_cast<unsigned long long>(cv.split_hash_beta[k]));
        w.cell(std::string(h[0])).cell(std::string(h[1]));
        w.end_row();
    }
    Json inputs = {{"data", d.path}, {"partitions", partitions}, {"test_size", test_size}};
    bessreg::report::write_json(
        out + "/summary.json",
        bessreg::report::summary(manifest("cv", inputs, roles_json(d), c, out, tolerances_em()),
                                 {{"data", data_json(in)}, {"cv", bessreg::report::cv_json(cv)}}));
    return 0;
}

Eigen::VectorXd vec_of(const Json& j, const char* key) {
    if (!j.is_array() || j.empty()) throw UsageError(std::string("config: '") + key + "' must be a non-empty array");
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    return v;
}

template <typename T>
std::vector<T> scalar_or_list(const Json& j) {
    if (j.is_array()) return j.get<std::vector<T>>();
    return {j.get<T>()};
}

// Config keys: generator, n (int or list), replications, kappa, lambda,
// contamination_prob (number or list), contamination_mu, contamination_phi,
// fixed_covariates, fit_models, run_dbb, level. Each (n, contamination_prob)
// pair is one cell.
int run_mc(const std::string& config_path, const CommonArgs& c) {
    std::ifstream f(config_path);
    if (!f) throw UsageError("cannot read config '" + config_path + "'");
    Json cfg_json;
    try {
        cfg_json = Json::parse(f);
    } catch (const Json::parse_error& e) {
        throw UsageError(std::string("config is not valid JSON: ") + e.what());
    }
    static const std::vector<std::string> known{"generator", "n", "replications", "kappa", "lambda",
                                                "contamination_prob", "contamination_mu", "contamination_phi",
                                                "fixed_covariates", "fit_models", "run_dbb", "level"};
    for (const auto& [k, v] : cfg_json.items()) {
        if (std::find(known.begin(), known.end(), k) == known.end()) throw UsageError("config: unknown key '" + k + "'");
    }

    bessreg::sim::Config base;
    base.seed = *c.seed;
    base.threads = c.threads;
    if (cfg_json.contains("generator"))
        base.generator = bessreg::sim::generator_from_string(cfg_json["generator"].get<std::string>());
    if (cfg_json.contains("replications")) base.replications = cfg_json["replications"].get<int>();
    if (cfg_json.contains("kappa")) base.kappa = vec_of(cfg_json["kappa"], "kappa");
    if (cfg_json.contains("lambda")) base.lambda = vec_of(cfg_json["lambda"], "lambda");
    if (cfg_json.contains("contamination_mu")) base.contamination_mu = cfg_json["contamination_mu"].get<double>();
    if (cfg_json.contains("contamination_phi")) base.contamination_phi = cfg_json["contamination_phi"].get<double>();
    if (cfg_json.contains("fixed_covariates")) base.fixed_covariates = cfg_json["fixed_covariates"].get<bool>();
    if (cfg_json.contains("run_dbb")) base.run_dbb = cfg_json["run_dbb"].get<bool>();
    if (cfg_json.contains("level")) base.level = cfg_json["level"].get<double>();
    if (cfg_json.contains("fit_models")) {
        base.fit_models.clear();
        for (const auto& m : cfg_json["fit_models"]) base.fit_models.push_back(bessreg::model_from_string(m.get<std::string>()));
    }
    const auto ns = cfg_json.contains("n") ? scalar_or_list<int>(cfg_json["n"]) : std::vector<int>{base.n};
    const auto pcs = cfg_json.contains("contamination_prob") ? scalar_or_list<double>(cfg_json["contamination_prob"])
                                                             : std::vector<double>{base.contamination_prob};

    const std::string out = resolve_out(c.out);
    fs::create_directories(out);
    bessreg::report::CsvWriter est(out + "/detail_mc_estimates.csv",
                                   {"cell", "replication", "model", "parameter", "estimate", "se", "converged"});
    bessreg::report::CsvWriter bias(out + "/plotdata_mc_bias.csv",
                                    {"cell", "n", "contamination_prob", "model", "parameter", "truth", "mean", "bias",
                                     "abs_rel_bias", "mc_sd", "mean_se", "coverage_pct"});
    Json cells = Json::array();
    int cell = 0;
    for (int n : ns) {
        for (double pc : pcs) {
            auto cfg = base;
            cfg.n = n;
            cfg.contamination_prob = pc;
            cfg.validate();
            const auto r = bessreg::sim::run_mc(cfg);
            cells.push_back(bessreg::report::mc_json(r));
            const Eigen::Index p = cfg.kappa.size();
            Eigen::VectorXd truth(p + cfg.lambda.size());
            truth << cfg.kappa, cfg.lambda;
            std::printf("cell %d: %s, n = %d, pc = %.3f\n", cell, bessreg::sim::to_string(cfg.generator).c_str(), n, pc);
            if (cfg.run_dbb) std::printf("  DBB chose bessel in %.1f%% of replications\n", r.dbb_bessel_rate);
            for (const auto& m : r.models) {
                const std::string name = bessreg::to_string(m.model);
                std::printf("  %s: %d failures, ARB", name.c_str(), m.failures);
                for (Eigen::Index j = 0; j < truth.size(); ++j) std::printf(" %.3f", m.abs_rel_bias[j]);
                std::printf("\n");
                for (Eigen::Index j = 0; j < truth.size(); ++j) {
                    const std::string par = (j < p ? "kappa" + std::to_string(j + 1) : "lambda" + std::to_string(j - p + 1));
                    bias.cell(static_cast<long long>(cell)).cell(static_cast<long long>(n)).cell(pc).cell(name).cell(par);
                    bias.cell(truth[j]).cell(m.mean[j]).cell(m.bias[j]).cell(m.abs_rel_bias[j]).cell(m.mc_sd[j]);
                    bias.cell(m.mean_se[j]).cell(m.coverage[j]);
                    bias.end_row();
                    for (Eigen::Index rep = 0; rep < m.estimates.rows(); ++rep) {
                        est.cell(static_cast<long long>(cell)).cell(static_cast<long long>(rep)).cell(name).cell(par);
                        est.cell(m.estimates(rep, j)).cell(m.std_errors(rep, j));
                        est.cell(static_cast<long long>(m.converged[rep]));
                        est.end_row();
                    }
                }
            }
            ++cell;
        }
    }
    Json inputs = {{"config", config_path}, {"config_contents", cfg_json}};
    bessreg::report::write_json(out + "/summary.json",
                                bessreg::report::summary(manifest("mc", inputs, nullptr, c, out, tolerances_em()),
                                                         {{"cells", cells}}));
    return 0;
}

int run_vif(const DataArgs& d, const CommonArgs& c, const std::vector<std::string>& columns, double threshold) {
    auto table = bessreg::io::read_csv(d.path);
    std::vector<std::size_t> excl = d.exclude_rows;
    std::sort(excl.begin(), excl.end());
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < table.rows(); ++i) {
        if (!std::binary_search(excl.begin(), excl.end(), i + 1)) keep.push_back(i);
    }
    if (keep.empty()) throw std::invalid_argument("no rows");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(keep.size()), static_cast<Eigen::Index>(columns.size()));
    for (std::size_t j = 0; j < columns.size(); ++j) {
        const auto& col = table.column(columns[j]);
        for (std::size_t i = 0; i < keep.size(); ++i) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = col[keep[i]] / d.covariate_divisor;
        }
    }
    const auto v = bessreg::diag::vif_select(m, columns, threshold);
    const std::string out = resolve_out(c.out);
    fs::create_directories(out);
    for (const auto& s : v.trace) std::printf("removed %-12s VIF %s\n", s.removed.c_str(),
                                              s.infinite ? "inf" : std::to_string(s.vif).c_str());
    bessreg::report::CsvWriter w(out + "/detail_vif.csv", {"step", "column", "vif", "status"});
    for (std::size_t k = 0; k < v.trace.size(); ++k) {
        w.cell(static_cast<long long>(k + 1)).cell(v.trace[k].removed).cell(v.trace[k].vif).cell(std::string("removed"));
        w.end_row();
    }
    for (std::size_t k = 0; k < v.kept.size(); ++k) {
        std::printf("kept    %-12s VIF %.4f\n", v.kept[k].c_str(), v.final_vif[k]);
        w.cell(static_cast<long long>(0)).cell(v.kept[k]).cell(v.final_vif[k]).cell(std::string("kept"));
        w.end_row();
    }
    Json roles = {{"columns", columns}, {"covariate_divisor", d.covariate_divisor}, {"exclude_rows", d.exclude_rows}};
    Json inputs = {{"data", d.path}, {"threshold", threshold}};
    bessreg::report::write_json(
        out + "/summary.json",
        bessreg::report::summary(manifest("vif", inputs, roles, c, out, {{"collinear_r2", 1.0 - 1e-12}}),
                                 {{"n", keep.size()}, {"vif", bessreg::report::vif_json(v)}}));
    return 0;
}

void print_error(const std::string& kind, const std::string& msg) {
    Json e = {{"error", {{"type", kind}, {"message", msg}}}};
    std::cerr << e.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bessel and beta regression for responses in (0,1)"};
    app.set_version_flag("--version", BESSREG_VERSION);
    app.require_subcommand(1);

    DataArgs d;
    CommonArgs c;
    std::string model = "both";
    std::string residual = "pearson";
    std::string ql_weight = "canonical";
    std::string config;
    std::vector<std::string> columns;
    double epsilon = 1e-5, level = 0.95, coverage = 0.95, threshold = 5.0;
    int reps = 1000, partitions = 1000, test_size = 10;

    auto* fit = app.add_subcommand("fit", "fit bessel and/or beta regression by maximum likelihood");
    add_data_options(fit, d);
    add_common_options(fit, c, false);
    fit->add_option("--model", model, "bessel, beta or both")->check(CLI::IsMember({"bessel", "beta", "both"}));
    fit->add_option("--epsilon", epsilon, "EM relative-change tolerance")->check(CLI::PositiveNumber);
    fit->add_option("--level", level, "confidence level for Wald intervals")->check(CLI::Range(0.5, 0.9999));

    auto* dbb = app.add_subcommand("dbb", "discrimination between bessel and beta");
    add_data_options(dbb, d);
    add_common_options(dbb, c, false);
    dbb->add_option("--ql-weight", ql_weight, "canonical or root-variance");

    auto* env = app.add_subcommand("envelope", "simulated envelope for a normal plot of residuals");
    add_data_options(env, d);
    add_common_options(env, c, true);
    env->add_option("--model", model, "bessel, beta or both")->check(CLI::IsMember({"bessel", "beta", "both"}));
    env->add_option("-B,--replications", reps)->check(CLI::Range(2, 1000000));
    env->add_option("--coverage", coverage)->check(CLI::Range(0.5, 0.9999));
    env->add_option("--residual", residual, "pearson or quantile")->check(CLI::IsMember({"pearson", "quantile"}));

    auto* cv = app.add_subcommand("cv", "repeated hold-out comparison of bessel and beta fits");
    add_data_options(cv, d);
    add_common_options(cv, c, true);
    cv->add_option("--partitions", partitions)->check(CLI::PositiveNumber);
    cv->add_option("--test-size", test_size)->check(CLI::PositiveNumber);

    auto* mc = app.add_subcommand("mc", "Monte Carlo study from a JSON config");
    mc->add_option("--config", config, "JSON config file")->required()->check(CLI::ExistingFile);
    add_common_options(mc, c, true);

    auto* vif = app.add_subcommand("vif", "variance inflation factors with iterative removal");
    vif->add_option("--data", d.path)->required()->check(CLI::ExistingFile);
    vif->add_option("--columns", columns, "candidate columns")->delimiter(',')->required();
    vif->add_option("--exclude-rows", d.exclude_rows)->delimiter(',');
    vif->add_option("--covariate-divisor", d.covariate_divisor)->check(CLI::PositiveNumber);
    vif->add_option("--threshold", threshold)->check(CLI::PositiveNumber);
    add_common_options(vif, c, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        print_error("usage", e.what());
        return 2;
    }

    try {
        if (*fit) return run_fit(d, c, model, epsilon, level);
        if (*dbb) return run_dbb(d, c, ql_weight);
        if (*env) return run_envelope(d, c, model, reps, coverage, residual);
        if (*cv) return run_cv(d, c, partitions, test_size);
        if (*mc) return run_mc(config, c);
        if (*vif) return run_vif(d, c, columns, threshold);
    } catch (const UsageError& e) {
        print_error("usage", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        print_error("input", e.what());
        return 3;
    } catch (const std::exception& e) {
        print_error("runtime", e.what());
        return 4;
    }
    return 0;
}
