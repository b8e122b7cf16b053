#pragma once

#include "bessreg/dbb.hpp"
#include "bessreg/diagnostics.hpp"
#include "bessreg/regression.hpp"
#include "bessreg/simstudy.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace bessreg::report {

using Json = nlohmann::ordered_json;

inline constexpr const char* kSchemaVersion = "1.0";

Json vector_json(const Eigen::VectorXd& v);
Json fit_json(const FitResult& fit, const Dataset& data, double level);
Json dbb_json(const dbb::Report& r);
Json envelope_json(const diag::EnvelopeResult& e);
Json cv_json(const diag::CvResult& cv);
Json mc_json(const sim::Report& r);
Json vif_json(const diag::VifResult& v);

/// {"schema_version", "manifest", "results"}.
Json summary(const Json& manifest, const Json& results);

/// Comma-separated table, numbers printed with 17 significant digits.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header);
    ~CsvWriter();
    CsvWriter(const CsvWriter&) = delete;
    CsvWriter& operator=(const CsvWriter&) = delete;

    CsvWriter& cell(double v);
    CsvWriter& cell(long long v);
    CsvWriter& cell(const std::string& v);
    void end_row();

private:
    std::FILE* f_;
    bool first_ = true;
};

void write_json(const std::string& path, const Json& j);

}  // namespace bessreg::report
