#pragma once

#include "bessreg/regression.hpp"
#include "bessreg/simstudy.hpp"

#include <string>

#ifndef BESSREG_DATA_DIR
#define BESSREG_DATA_DIR "data"
#endif

namespace testing {

inline std::string data_path(const std::string& name) { return std::string(BESSREG_DATA_DIR) + "/" + name; }

/// One replication of the standard simulation design.
inline bessreg::Dataset simulated(bessreg::sim::Generator g, int n, std::uint64_t seed, int rep = 0) {
    bessreg::sim::Config cfg;
    cfg.generator = g;
    cfg.n = n;
    cfg.seed = seed;
    return bessreg::sim::gen_dataset(cfg, rep);
}

/// Intercept-only design.
inline bessreg::Dataset intercept_only(const Eigen::VectorXd& z) {
    bessreg::Dataset d;
    d.z = z;
    d.X = Eigen::MatrixXd::Ones(z.size(), 1);
    d.V = Eigen::MatrixXd::Ones(z.size(), 1);
    d.mean_names = {"(intercept)"};
    d.precision_names = {"(intercept)"};
    return d;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace testing
