#include "bessreg/io.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace bessreg::io {
namespace {

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r\"");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\"");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

const std::vector<double>& Table::column(const std::string& name) const {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw std::invalid_argument("missing column '" + name + "'");
    return columns[static_cast<std::size_t>(it - names.begin())];
}

Table read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    Table t;
    std::string line;
    while (std::getline(in, line) && trim(line).empty()) {
    }
    if (trim(line).empty()) throw std::invalid_argument("no rows");
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    t.names = split(line);
    t.columns.assign(t.names.size(), {});

    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        ++row;
        const auto cells = split(line);
        if (cells.size() != t.names.size()) {
            throw std::invalid_argument("row " + std::to_string(row) + ": expected " +
                                        std::to_string(t.names.size()) + " fields, got " +
                                        std::to_string(cells.size()));
        }
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const char* s = cells[c].c_str();
            char* end = nullptr;
            errno = 0;
            const double v = std::strtod(s, &end);
            if (cells[c].empty() || *end != '\0' || errno == ERANGE || !std::isfinite(v)) {
                throw std::invalid_argument("non-numeric cell at row " + std::to_string(row) + ", column '" +
                                            t.names[c] + "': '" + cells[c] + "'");
            }
            t.columns[c].push_back(v);
        }
    }
    if (row == 0) throw std::invalid_argument("no rows");
    return t;
}

Ingested build_dataset(const Table& table, const Roles& roles) {
    if (table.rows() == 0) throw std::invalid_argument("no rows");
    const std::set<std::size_t> excluded(roles.exclude_rows.begin(), roles.exclude_rows.end());
    Ingested out;
    for (std::size_t r = 1; r <= table.rows(); ++r) {
        if (!excluded.count(r)) out.kept_rows.push_back(r);
    }
    const auto n = static_cast<Eigen::Index>(out.kept_rows.size());
    if (n == 0) throw std::invalid_argument("no rows");

    const auto& y = table.column(roles.response);
    Dataset& d = out.data;
    d.z.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double v = y[out.kept_rows[static_cast<std::size_t>(i)] - 1] / roles.response_divisor;
        if (roles.rescale) {
            const auto [lo, hi] = *roles.rescale;
            if (!(hi > lo)) throw std::invalid_argument("rescale needs min < max");
            if (v < lo || v > hi) {
                throw std::invalid_argument("response " + std::to_string(v) + " outside rescale range [" +
                                            std::to_string(lo) + ", " + std::to_string(hi) + "]");
            }
            v = (v - lo) / (hi - lo);
            constexpr double eps = 1e-6;
            if (v < eps || v > 1.0 - eps) {
                v = std::clamp(v, eps, 1.0 - eps);
                ++out.clamped;
            }
        }
        if (roles.clamp_eps) {
            const double eps = *roles.clamp_eps;
            if (v < eps || v > 1.0 - eps) {
                v = std::clamp(v, eps, 1.0 - eps);
                ++out.clamped;
            }
        }
        d.z[i] = v;
    }

    auto design = [&](const std::vector<std::string>& cols, bool intercept, std::vector<std::string>& names) {
        const Eigen::Index k = static_cast<Eigen::Index>(cols.size()) + (intercept ? 1 : 0);
        Eigen::MatrixXd m(n, k);
        Eigen::Index j = 0;
        if (intercept) {
            m.col(j++).setOnes();
            names.push_back("(intercept)");
        }
        for (const auto& c : cols) {
            const auto& v = table.column(c);
            for (Eigen::Index i = 0; i < n; ++i) {
                m(i, j) = v[out.kept_rows[static_cast<std::size_t>(i)] - 1] / roles.covariate_divisor;
            }
            names.push_back(c);
            ++j;
        }
        return m;
    };
    d.X = design(roles.mean, roles.mean_intercept, d.mean_names);
    d.V = design(roles.precision, roles.precision_intercept, d.precision_names);
    d.validate();
    return out;
}

Ingested ingest_csv(const std::string& path, const Roles& roles) { return build_dataset(read_csv(path), roles); }

void write_dataset_csv(const Dataset& data, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot write '" + path + "'");
    auto col_name = [](const std::vector<std::string>& names, Eigen::Index j, const char* prefix) {
        const auto u = static_cast<std::size_t>(j);
        return std::string(prefix) + (u < names.size() ? names[u] : std::to_string(j + 1));
    };
    std::fputs("z", f);
    for (Eigen::Index j = 0; j < data.p(); ++j) std::fprintf(f, ",%s", col_name(data.mean_names, j, "mean.").c_str());
    for (Eigen::Index j = 0; j < data.q(); ++j) {
        std::fprintf(f, ",%s", col_name(data.precision_names, j, "prec.").c_str());
    }
    std::fputc('\n', f);
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        std::fprintf(f, "%.17g", data.z[i]);
        for (Eigen::Index j = 0; j < data.p(); ++j) std::fprintf(f, ",%.17g", data.X(i, j));
        for (Eigen::Index j = 0; j < data.q(); ++j) std::fprintf(f, ",%.17g", data.V(i, j));
        std::fputc('\n', f);
    }
    std::fclose(f);
}

}  // namespace bessreg::io
