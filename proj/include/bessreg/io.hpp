#pragma once

#include "bessreg/regression.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace bessreg::io {

/// Numeric CSV table held column-wise.
struct Table {
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;

    std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
    /// Throws std::invalid_argument for an unknown name.
    const std::vector<double>& column(const std::string& name) const;
};

/// Reads a header + comma-separated numeric body. Errors name the row and
/// column of the first bad cell.
Table read_csv(const std::string& path);

struct Roles {
    std::string response;
    std::vector<std::string> mean;
    std::vector<std::string> precision;
    bool mean_intercept = true;
    bool precision_intercept = true;
    /// Response mapped to (y - min)/(max - min), then clamped to (1e-6, 1 - 1e-6).
    std::optional<std::pair<double, double>> rescale;
    /// Divisors applied before anything else.
    double response_divisor = 1.0;
    double covariate_divisor = 1.0;
    /// 1-based data rows dropped before building the design.
    std::vector<std::size_t> exclude_rows;
    /// Responses outside (eps, 1 - eps) are moved to the nearest bound.
    std::optional<double> clamp_eps;
};

struct Ingested {
    Dataset data;
    std::size_t clamped = 0;
    std::vector<std::size_t> kept_rows;  // 1-based source rows
};

Ingested build_dataset(const Table& table, const Roles& roles);
Ingested ingest_csv(const std::string& path, const Roles& roles);

/// Writes z, X columns and V columns (header from the dataset names).
void write_dataset_csv(const Dataset& data, const std::string& path);

}  // namespace bessreg::io
