#include "bessreg/optim.hpp"

#include <cmath>

namespace bessreg::optim {

BfgsResult minimize_bfgs(const Objective& fg, Eigen::VectorXd x0, const BfgsOptions& opts) {
    const Eigen::Index k = x0.size();
    BfgsResult res;
    res.x = std::move(x0);
    res.gradient.resize(k);
    res.value = fg(res.x, res.gradient);
    if (!std::isfinite(res.value)) return res;

    const bool seeded = opts.initial_inverse_hessian.rows() == k && opts.initial_inverse_hessian.cols() == k;
    Eigen::MatrixXd h = seeded ? opts.initial_inverse_hessian : Eigen::MatrixXd::Identity(k, k);
    bool scaled = seeded;
    Eigen::VectorXd g_new(k), x_new(k);

    for (int it = 0; it < opts.max_iter; ++it) {
        if (res.gradient.lpNorm<Eigen::Infinity>() <= opts.grad_tol) {
            res.converged = true;
            break;
        }
        Eigen::VectorXd dir = -h * res.gradient;
        double slope = res.gradient.dot(dir);
        if (!(slope < 0.0)) {
            h.setIdentity();
            scaled = false;
            dir = -res.gradient;
            slope = -res.gradient.squaredNorm();
        }
        // Keep the first trial step bounded before curvature information exists.
        double step = 1.0;
        if (!scaled) step = std::min(1.0, 1.0 / dir.lpNorm<Eigen::Infinity>());

        double f_new = 0.0;
        bool accepted = false;
        for (int bt = 0; bt < opts.max_backtracks; ++bt) {
            x_new = res.x + step * dir;
            f_new = fg(x_new, g_new);
            if (std::isfinite(f_new) && f_new < res.value && f_new <= res.value + opts.armijo * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;  // no further decrease available at this precision

        const Eigen::VectorXd s = x_new - res.x;
        const Eigen::VectorXd y = g_new - res.gradient;
        const double sy = s.dot(y);
        res.x = x_new;
        res.value = f_new;
        res.gradient = g_new;
        res.iterations = it + 1;
        if (sy > 1e-12 * s.norm() * y.norm()) {
            if (!scaled) {
                h *= sy / y.squaredNorm();
                scaled = true;
            }
            const double rho = 1.0 / sy;
            const Eigen::VectorXd hy = h * y;
            // H+ = (I - rho s y')H(I - rho y s') + rho s s'
            h += rho * rho * (y.dot(hy) + sy) * (s * s.transpose()) -
                 rho * (hy * s.transpose() + s * hy.transpose());
        }
    }
    if (res.gradient.lpNorm<Eigen::Infinity>() <= opts.grad_tol) res.converged = true;
    return res;
}

}  // namespace bessreg::optim
