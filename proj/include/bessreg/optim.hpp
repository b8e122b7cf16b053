#pragma once

#include <Eigen/Dense>

#include <functional>

namespace bessreg::optim {

/// f(x) with its gradient written into the second argument.
using Objective = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

struct BfgsOptions {
    double grad_tol = 1e-8;  // on the max-norm of the gradient
    int max_iter = 200;
    double armijo = 1e-4;
    int max_backtracks = 60;
    /// Starting inverse Hessian; identity (with a bounded first step) if empty.
    Eigen::MatrixXd initial_inverse_hessian;
};

struct BfgsResult {
    Eigen::VectorXd x;
    double value = 0.0;
    Eigen::VectorXd gradient;
    int iterations = 0;
    bool converged = false;
};

/// Quasi-Newton minimisation (inverse-Hessian BFGS, Armijo backtracking).
/// Every accepted step strictly decreases f.
BfgsResult minimize_bfgs(const Objective& fg, Eigen::VectorXd x0, const BfgsOptions& opts = {});

}  // namespace bessreg::optim
