#include "bessreg/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace bessreg::report {
namespace {

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json precision_fit_json(const dbb::PrecisionFit& pf) {
    return {{"lambda", vector_json(pf.lambda)}, {"converged", pf.converged}, {"boundary", pf.boundary}};
}

}  // namespace

Json vector_json(const Eigen::VectorXd& v) {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v[i]));
    return a;
}

Json fit_json(const FitResult& fit, const Dataset& data, double level) {
    Json coefs = Json::array();
    std::string wald_error;
    try {
        for (const auto& r : wald_inference(fit, data, level)) {
            coefs.push_back({{"name", r.name},
                             {"estimate", number(r.estimate)},
                             {"se", number(r.se)},
                             {"z", number(r.z)},
                             {"p_value", number(r.p_value)},
                             {"ci_lo", number(r.ci_lo)},
                             {"ci_hi", number(r.ci_hi)}});
        }
    } catch (const std::exception& e) {
        wald_error = e.what();
        const Eigen::VectorXd est = fit.theta.packed();
        for (Eigen::Index j = 0; j < est.size(); ++j) coefs.push_back({{"estimate", number(est[j])}});
    }
    Json j = {{"model", to_string(fit.model)},
              {"coefficients", coefs},
              {"loglik", number(fit.loglik)},
              {"iterations", fit.em_iterations},
              {"converged", fit.converged},
              {"information_pd", fit.information_pd},
              {"level", level}};
    if (!wald_error.empty()) j["inference_error"] = wald_error;
    return j;
}

Json dbb_json(const dbb::Report& r) {
    Json j = {{"mean_sq_response", r.mean_sq_response},
              {"variance_bound", r.variance_bound},
              {"variance_bound_sum", r.variance_bound_sum},
              {"precheck_beta", r.precheck_beta},
              {"d_bessel", r.d_bessel ? number(*r.d_bessel) : Json(nullptr)},
              {"d_beta", r.d_beta ? number(*r.d_beta) : Json(nullptr)},
              {"abs_d_bessel", r.d_bessel ? number(std::abs(*r.d_bessel)) : Json(nullptr)},
              {"abs_d_beta", r.d_beta ? number(std::abs(*r.d_beta)) : Json(nullptr)},
              {"decision", to_string(r.decision)},
              {"ql_weight", r.weight == dbb::QlWeight::canonical ? "canonical" : "root-variance"},
              {"kappa_tilde", vector_json(r.kappa_tilde)}};
    if (r.precision_bessel) j["precision_bessel"] = precision_fit_json(*r.precision_bessel);
    if (r.precision_beta) j["precision_beta"] = precision_fit_json(*r.precision_beta);
    return j;
}

Json envelope_json(const diag::EnvelopeResult& e) {
    return {{"model", to_string(e.model)},
            {"residual", diag::to_string(e.kind)},
            {"coverage_pct", e.coverage_pct},
            {"replications", e.replications},
            {"dropped", e.dropped},
            {"retried", e.retried},
            {"simulated_clamped", e.simulated_clamped},
            {"band_rows", {e.lower_row, e.upper_row}}};
}

Json cv_json(const diag::CvResult& cv) {
    bool same = cv.split_hash_bessel == cv.split_hash_beta;
    return {{"partitions", cv.partition.size()},
            {"dropped", cv.dropped},
            {"test_size", cv.test_size},
            {"seed", cv.seed},
            {"fraction_rss_bessel_below_beta", diag::fraction_below_one(cv.rss_ratio)},
            {"fraction_fsmd_bessel_below_beta", diag::fraction_below_one(cv.fsmd_ratio)},
            {"identical_splits", same}};
}

Json mc_json(const sim::Report& r) {
    const auto& c = r.config;
    Json models = Json::array();
    for (const auto& m : r.models) {
        models.push_back({{"model", to_string(m.model)},
                          {"failures", m.failures},
                          {"mean", vector_json(m.mean)},
                          {"bias", vector_json(m.bias)},
                          {"abs_rel_bias", vector_json(m.abs_rel_bias)},
                          {"mc_sd", vector_json(m.mc_sd)},
                          {"mean_se", vector_json(m.mean_se)},
                          {"coverage_pct", vector_json(m.coverage)}});
    }
    Json j = {{"generator", sim::to_string(c.generator)},
              {"n", c.n},
              {"replications", c.replications},
              {"contamination_prob", c.contamination_prob},
              {"kappa", vector_json(c.kappa)},
              {"lambda", vector_json(c.lambda)},
              {"fixed_covariates", c.fixed_covariates},
              {"models", models}};
    if (c.run_dbb) {
        j["dbb"] = {{"bessel_rate_pct", r.dbb_bessel_rate}, {"failures", r.dbb_failures}};
    }
    return j;
}

Json vif_json(const diag::VifResult& v) {
    Json trace = Json::array();
    for (const auto& s : v.trace) {
        trace.push_back({{"removed", s.removed}, {"vif", number(s.vif)}, {"infinite", s.infinite}});
    }
    Json fin = Json::array();
    for (std::size_t i = 0; i < v.kept.size(); ++i) fin.push_back({{"column", v.kept[i]}, {"vif", number(v.final_vif[i])}});
    return {{"kept", v.kept}, {"removed", trace}, {"final", fin}};
}

Json summary(const Json& manifest, const Json& results) {
    return {{"schema_version", kSchemaVersion}, {"manifest", manifest}, {"results", results}};
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : f_(std::fopen(path.c_str(), "w")) {
    if (!f_) throw std::runtime_error("cannot write '" + path + "'");
    for (const auto& h : header) cell(h);
    end_row();
}

CsvWriter::~CsvWriter() {
    if (f_) std::fclose(f_);
}

CsvWriter& CsvWriter::cell(double v) {
    std::fprintf(f_, first_ ? "%.17g" : ",%.17g", v);
    first_ = false;
    return *this;
}

CsvWriter& CsvWriter::cell(long long v) {
    std::fprintf(f_, first_ ? "%lld" : ",%lld", v);
    first_ = false;
    return *this;
}

CsvWriter& CsvWriter::cell(const std::string& v) {
    std::fprintf(f_, first_ ? "%s" : ",%s", v.c_str());
    first_ = false;
    return *this;
}

void CsvWriter::end_row() {
    std::fputc('\n', f_);
    first_ = true;
}

void write_json(const std::string& path, const Json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << j.dump(2) << '\n';
}

}  // namespace bessreg::report
