#include "bessreg/regression.hpp"

#include "bessreg/distributions.hpp"
#include "bessreg/optim.hpp"
#include "bessreg/simd/kernels.hpp"
#include "bessreg/specfun.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/digamma.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace bessreg {

std::string to_string(Model m) { return m == Model::bessel ? "bessel" : "beta"; }

Model model_from_string(const std::string& s) {
    if (s == "bessel") return Model::bessel;
    if (s == "beta") return Model::beta;
    throw std::invalid_argument("unknown model '" + s + "' (expected bessel or beta)");
}

// ---- Dataset / Theta ------------------------------------------------------

void Dataset::validate() const {
    const Eigen::Index n = z.size();
    if (n == 0) throw std::invalid_argument("no rows");
    if (X.rows() != n || V.rows() != n) {
        throw std::invalid_argument("design matrices must have one row per response");
    }
    if (mean_offset.size() != 0 && mean_offset.size() != n) {
        throw std::invalid_argument("mean offset length differs from the number of responses");
    }
    if (V.cols() == 0) throw std::invalid_argument("precision design needs at least one column");
    if (p() + q() >= n) {
        throw std::invalid_argument("need p + q < n (p=" + std::to_string(p()) + ", q=" +
                                    std::to_string(q()) + ", n=" + std::to_string(n) + ")");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(z[i] > 1e-10 && z[i] < 1.0 - 1e-10)) {
            throw std::invalid_argument("response " + std::to_string(i + 1) + " = " + std::to_string(z[i]) +
                                        " is not strictly inside (0,1); rescale it linearly to the "
                                        "open unit interval first");
        }
    }
    auto check_rank = [](const Eigen::MatrixXd& m, const char* what) {
        if (m.cols() == 0) return;
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m);
        if (qr.rank() < m.cols()) {
            throw std::invalid_argument(std::string(what) + " design matrix is not of full column rank");
        }
    };
    check_rank(X, "mean");
    check_rank(V, "precision");
}

Dataset Dataset::subset(const std::vector<Eigen::Index>& idx) const {
    Dataset out;
    const auto m = static_cast<Eigen::Index>(idx.size());
    out.z.resize(m);
    out.X.resize(m, X.cols());
    out.V.resize(m, V.cols());
    if (mean_offset.size() != 0) out.mean_offset.resize(m);
    for (Eigen::Index r = 0; r < m; ++r) {
        const Eigen::Index i = idx[static_cast<std::size_t>(r)];
        out.z[r] = z[i];
        out.X.row(r) = X.row(i);
        out.V.row(r) = V.row(i);
        if (mean_offset.size() != 0) out.mean_offset[r] = mean_offset[i];
    }
    out.mean_names = mean_names;
    out.precision_names = precision_names;
    return out;
}

Eigen::VectorXd Theta::packed() const {
    Eigen::VectorXd v(kappa.size() + lambda.size());
    v << kappa, lambda;
    return v;
}

Theta Theta::unpack(const Eigen::VectorXd& v, Eigen::Index p) {
    return {v.head(p), v.tail(v.size() - p)};
}

namespace {

struct Predictors {
    Eigen::VectorXd eta;
    Eigen::VectorXd log_phi;
};

Predictors predictors(const Theta& theta, const Dataset& data) {
    Predictors pr;
    pr.eta = data.X * theta.kappa;
    if (data.mean_offset.size() != 0) pr.eta += data.mean_offset;
    pr.log_phi = data.V * theta.lambda;
    return pr;
}

std::span<const double> cs(const Eigen::VectorXd& v) {
    return {v.data(), static_cast<std::size_t>(v.size())};
}
std::span<double> ms(Eigen::VectorXd& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

double logistic(double x) {
    return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

}  // namespace

LinkedParams linked_params(const Theta& theta, const Dataset& data) {
    const auto pr = predictors(theta, data);
    LinkedParams lp{Eigen::VectorXd(data.n()), Eigen::VectorXd(data.n())};
    simd::inverse_links(cs(pr.eta), cs(pr.log_phi), ms(lp.mu), ms(lp.phi));
    return lp;
}

// ---- bessel likelihood and EM -------------------------------------------

double loglik_bessel(const Theta& theta, const Dataset& data) {
    const auto lp = linked_params(theta, data);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        const double mu = lp.mu[i];
        const double phi = lp.phi[i];
        if (!(mu > 0.0 && mu < 1.0) || !(phi > 0.0) || !std::isfinite(phi)) {
            return -std::numeric_limits<double>::infinity();
        }
        sum += bessel_logpdf({mu, phi}, data.z[i]);
    }
    return sum;
}

EStep e_step(const Theta& theta, const Dataset& data) {
    const auto lp = linked_params(theta, data);
    EStep es{Eigen::VectorXd(data.n()), Eigen::VectorXd(data.n())};
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        const double x = lp.phi[i] * zeta(lp.mu[i], data.z[i]);
        const auto k = specfun::bessel_k_scaled_all(x);
        // Scaled values share the e^x factor, so the ratios are exact.
        es.psi[i] = k[2] / (x * k[1]);
        es.chi[i] = k[3] / (x * x * k[1]);
    }
    return es;
}

namespace {

// Q and its gradient with respect to the packed parameters.
double q_value_grad(const Theta& theta, const Eigen::VectorXd& psi, const Dataset& data,
                    Eigen::VectorXd* grad) {
    const auto pr = predictors(theta, data);
    const Eigen::Index n = data.n();
    Eigen::VectorXd wk(n), wl(n);
    const double q = simd::q_terms(cs(pr.eta), cs(pr.log_phi), cs(data.z), cs(psi), ms(wk), ms(wl));
    if (grad) {
        grad->resize(data.p() + data.q());
        grad->head(data.p()) = data.X.transpose() * wk;
        grad->tail(data.q()) = data.V.transpose() * wl;
    }
    return q;
}

}  // namespace

double q_function(const Theta& theta, const Eigen::VectorXd& psi, const Dataset& data) {
    return q_value_grad(theta, psi, data, nullptr);
}

Eigen::VectorXd q_score(const Theta& theta, const Eigen::VectorXd& psi, const Dataset& data) {
    Eigen::VectorXd g;
    q_value_grad(theta, psi, data, &g);
    return g;
}

Eigen::MatrixXd q_neg_hessian(const Theta& theta, const Eigen::VectorXd& psi, const Dataset& data) {
    const Eigen::Index n = data.n(), p = data.p(), q = data.q();
    const auto lp = linked_params(theta, data);
    Eigen::VectorXd h_kk(n), h_ll(n), h_kl(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double mu = lp.mu[i], phi = lp.phi[i], z = data.z[i];
        const double m = mu * (1.0 - mu);
        const double zz = z * (1.0 - z);
        const double a = 1.0 + (z - mu) * (z - mu) / zz;
        const double phi2 = phi * phi;
        h_kk[i] = m * (2.0 + psi[i] * phi2 / zz * (m - (1.0 - 2.0 * mu) * (z - mu)));
        h_ll[i] = phi * (2.0 * phi * psi[i] * a - 1.0);
        h_kl[i] = -2.0 * phi2 * psi[i] * m * (z - mu) / zz;
    }
    Eigen::MatrixXd h(p + q, p + q);
    h.topLeftCorner(p, p) = data.X.transpose() * h_kk.asDiagonal() * data.X;
    h.bottomRightCorner(q, q) = data.V.transpose() * h_ll.asDiagonal() * data.V;
    h.topRightCorner(p, q) = data.X.transpose() * h_kl.asDiagonal() * data.V;
    h.bottomLeftCorner(q, p) = h.topRightCorner(p, q).transpose();
    return h;
}

Theta default_init(const Dataset& data, Model model) {
    const Eigen::Index n = data.n();
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) y[i] = std::log(data.z[i] / (1.0 - data.z[i]));
    if (data.mean_offset.size() != 0) y -= data.mean_offset;

    Theta th;
    Eigen::VectorXd fitted;
    if (data.p() > 0) {
        th.kappa = data.X.colPivHouseholderQr().solve(y);
        fitted = data.X * th.kappa;
    } else {
        th.kappa.resize(0);
        fitted = Eigen::VectorXd::Zero(n);
    }
    const Eigen::VectorXd res = y - fitted;
    const double dof = static_cast<double>(std::max<Eigen::Index>(n - data.p(), 1));
    const double sigma2 = std::max(res.squaredNorm() / dof, 1e-300);

    double phi_check = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double eta = fitted[i] + (data.mean_offset.size() != 0 ? data.mean_offset[i] : 0.0);
        const double mu = logistic(eta);
        const double m = mu * (1.0 - mu);
        // mu(1-mu)/sigma_i^2 - 1 with sigma_i^2 = sigma2 (mu(1-mu))^2
        phi_check += 1.0 / (sigma2 * m) - 1.0;
    }
    phi_check /= static_cast<double>(n);

    th.lambda = Eigen::VectorXd::Zero(data.q());
    double l1 = std::log(std::max(phi_check, 0.1));
    if (model == Model::bessel) l1 = std::numbers::ln2 + std::log1p(std::exp(l1));
    th.lambda[0] = l1;
    return th;
}

Eigen::MatrixXd louis_information(const Theta& theta, const Dataset& data) {
    const Eigen::Index n = data.n(), p = data.p(), q = data.q();
    const auto lp = linked_params(theta, data);
    const auto es = e_step(theta, data);

    // Row weights for each block. "h" = conditional Hessian, "s" = diagonal
    // (i = k) part of the conditional score outer product, "e" = conditional
    // score means entering the i != k cross sums.
    Eigen::VectorXd h_kk(n), h_ll(n), h_kl(n), s_kk(n), s_ll(n), s_kl(n), e_k(n), e_l(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double mu = lp.mu[i], phi = lp.phi[i], z = data.z[i];
        const double psi = es.psi[i], chi = es.chi[i];
        const double m = mu * (1.0 - mu);
        const double zz = z * (1.0 - z);
        const double d = (z - mu) / zz;
        const double a = 1.0 + (z - mu) * (z - mu) / zz;
        const double phi2 = phi * phi;

        h_kk[i] = m * (2.0 + psi * phi2 / zz * (m - (1.0 - 2.0 * mu) * (z - mu)));
        h_ll[i] = phi * (2.0 * phi * psi * a - 1.0);
        h_kl[i] = -2.0 * phi2 * psi * m * d;

        // Complete-data scores are ak + bk/W and al + bl/W.
        const double ak = 1.0 - 2.0 * mu, bk = phi2 * m * d;
        const double al = 2.0 + phi, bl = -phi2 * a;
        s_kk[i] = ak * ak + 2.0 * ak * bk * psi + bk * bk * chi;
        s_ll[i] = al * al + 2.0 * al * bl * psi + bl * bl * chi;
        s_kl[i] = ak * al + psi * (ak * bl + bk * al) + chi * bk * bl;
        e_k[i] = ak + psi * bk;
        e_l[i] = al + psi * bl;
    }

    const auto& X = data.X;
    const auto& V = data.V;
    auto weighted = [](const Eigen::MatrixXd& A, const Eigen::VectorXd& w, const Eigen::MatrixXd& B) {
        return Eigen::MatrixXd(A.transpose() * w.asDiagonal() * B);
    };

    Eigen::MatrixXd info(p + q, p + q);
    // Sum_{i != k} u_i w_k' = (Sum u)(Sum w)' - Sum u_i w_i'.
    const Eigen::VectorXd gk = X.transpose() * e_k;
    const Eigen::VectorXd gl = V.transpose() * e_l;
    const Eigen::VectorXd ekk = e_k.cwiseProduct(e_k);
    const Eigen::VectorXd ell = e_l.cwiseProduct(e_l);
    const Eigen::VectorXd ekl = e_k.cwiseProduct(e_l);

    info.topLeftCorner(p, p) =
        weighted(X, h_kk, X) - weighted(X, s_kk, X) - (gk * gk.transpose() - weighted(X, ekk, X));
    info.bottomRightCorner(q, q) =
        weighted(V, h_ll, V) - weighted(V, s_ll, V) - (gl * gl.transpose() - weighted(V, ell, V));
    const Eigen::MatrixXd kl =
        weighted(X, h_kl, V) - weighted(X, s_kl, V) - (gk * gl.transpose() - weighted(X, ekl, V));
    info.topRightCorner(p, q) = kl;
    info.bottomLeftCorner(q, p) = kl.transpose();
    return info;
}

Eigen::VectorXd standard_errors(const Eigen::MatrixXd& info, bool* pd) {
    const Eigen::Index k = info.rows();
    Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (info + info.transpose()));
    if (llt.info() != Eigen::Success) {
        if (pd) *pd = false;
        return Eigen::VectorXd::Constant(k, std::numeric_limits<double>::quiet_NaN());
    }
    if (pd) *pd = true;
    const Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(k, k));
    return inv.diagonal().cwiseMax(0.0).cwiseSqrt();
}

FitResult fit_bessel_em(const Dataset& data, const std::optional<Theta>& init, const EmOptions& opts) {
    data.validate();
    FitResult fit;
    fit.model = Model::bessel;
    Theta theta = init ? *init : default_init(data, Model::bessel);
    const Eigen::Index p = data.p();

    fit.loglik_trace.push_back(loglik_bessel(theta, data));
    optim::BfgsOptions bo;
    bo.grad_tol = opts.inner_grad_tol;
    bo.max_iter = opts.inner_max_iter;

    for (int r = 1; r <= opts.max_iter; ++r) {
        const EStep es = e_step(theta, data);
        auto neg_q = [&](const Eigen::VectorXd& v, Eigen::VectorXd& g) {
            const double val = q_value_grad(Theta::unpack(v, p), es.psi, data, &g);
            g = -g;
            return -val;
        };
        const Eigen::VectorXd old = theta.packed();
        // Seed the quasi-Newton metric with the exact curvature of Q when it
        // is positive definite; the M-step then needs only a few iterations.
        Eigen::LLT<Eigen::MatrixXd> llt(q_neg_hessian(theta, es.psi, data));
        bo.initial_inverse_hessian.resize(0, 0);
        if (llt.info() == Eigen::Success) {
            bo.initial_inverse_hessian = llt.solve(Eigen::MatrixXd::Identity(old.size(), old.size()));
        }
        const auto opt = optim::minimize_bfgs(neg_q, old, bo);
        theta = Theta::unpack(opt.x, p);
        fit.loglik_trace.push_back(loglik_bessel(theta, data));
        fit.em_iterations = r;

        const double denom = old.norm();
        const double change = (opt.x - old).norm() / (denom > 0.0 ? denom : 1.0);
        if (change < opts.epsilon) {
            fit.converged = true;
            break;
        }
    }
    fit.theta = theta;
    fit.loglik = fit.loglik_trace.back();
    if (opts.compute_information) {
        fit.observed_information = louis_information(theta, data);
        fit.std_errors = standard_errors(fit.observed_information, &fit.information_pd);
    }
    return fit;
}

// ---- beta model -----------------------------------------------------------

double loglik_beta(const Theta& theta, const Dataset& data) {
    const auto lp = linked_params(theta, data);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        const double mu = lp.mu[i], phi = lp.phi[i];
        if (!(mu > 0.0 && mu < 1.0) || !(phi > 0.0) || !std::isfinite(phi)) {
            return -std::numeric_limits<double>::infinity();
        }
        sum += beta_logpdf({mu, phi}, data.z[i]);
    }
    return sum;
}

Eigen::VectorXd score_beta(const Theta& theta, const Dataset& data) {
    using boost::math::digamma;
    const auto lp = linked_params(theta, data);
    const Eigen::Index n = data.n();
    Eigen::VectorXd wk(n), wl(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double mu = lp.mu[i], phi = lp.phi[i], z = data.z[i];
        const double a = mu * phi, b = (1.0 - mu) * phi;
        const double da = digamma(a), db = digamma(b);
        const double lz = std::log(z), l1z = std::log1p(-z);
        wk[i] = phi * mu * (1.0 - mu) * ((lz - l1z) - (da - db));
        wl[i] = phi * (digamma(phi) - mu * da - (1.0 - mu) * db + mu * lz + (1.0 - mu) * l1z);
    }
    Eigen::VectorXd g(data.p() + data.q());
    g.head(data.p()) = data.X.transpose() * wk;
    g.tail(data.q()) = data.V.transpose() * wl;
    return g;
}

FitResult fit_beta_ml(const Dataset& data, const std::optional<Theta>& init, const BetaOptions& opts) {
    data.validate();
    FitResult fit;
    fit.model = Model::beta;
    const Eigen::Index p = data.p();
    const Theta start = init ? *init : default_init(data, Model::beta);

    auto neg_ll = [&](const Eigen::VectorXd& v, Eigen::VectorXd& g) {
        const Theta th = Theta::unpack(v, p);
        const double ll = loglik_beta(th, data);
        if (!std::isfinite(ll)) {
            g = Eigen::VectorXd::Zero(v.size());
            return std::numeric_limits<double>::infinity();
        }
        g = -score_beta(th, data);
        return -ll;
    };
    optim::BfgsOptions bo;
    bo.grad_tol = opts.grad_tol;
    bo.max_iter = opts.max_iter;
    const auto opt = optim::minimize_bfgs(neg_ll, start.packed(), bo);

    fit.theta = Theta::unpack(opt.x, p);
    fit.loglik = -opt.value;
    fit.loglik_trace = {fit.loglik};
    fit.em_iterations = opt.iterations;
    // BFGS stops once f stalls at double precision; accept that point if the
    // gradient is tiny relative to the size of the sum (f can be near zero).
    const double scale = std::max({1.0, std::abs(opt.value), static_cast<double>(data.n())});
    fit.converged = opt.converged || opt.gradient.lpNorm<Eigen::Infinity>() <= 1e-6 * scale;
    if (opts.compute_information) {
        const Eigen::Index k = opt.x.size();
        Eigen::MatrixXd hess(k, k);
        for (Eigen::Index j = 0; j < k; ++j) {
            const double h = 1e-5 * std::max(1.0, std::abs(opt.x[j]));
            Eigen::VectorXd xp = opt.x, xm = opt.x;
            xp[j] += h;
            xm[j] -= h;
            hess.col(j) = (score_beta(Theta::unpack(xp, p), data) - score_beta(Theta::unpack(xm, p), data)) /
                          (2.0 * h);
        }
        fit.observed_information = -0.5 * (hess + hess.transpose());
        fit.std_errors = standard_errors(fit.observed_information, &fit.information_pd);
    }
    return fit;
}

FitResult fit_model(Model model, const Dataset& data, const std::optional<Theta>& init) {
    return model == Model::bessel ? fit_bessel_em(data, init) : fit_beta_ml(data, init);
}

// ---- inference ------------------------------------------------------------

WaldRow wald_row(std::string name, double estimate, double se, double level) {
    if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("confidence level must lie in (0,1)");
    const boost::math::normal nd;
    const double zq = boost::math::quantile(nd, 0.5 + 0.5 * level);
    WaldRow row{std::move(name), estimate, se, 0.0, 1.0, 0.0, 0.0};
    row.z = estimate / se;
    row.p_value = std::erfc(std::abs(row.z) / std::numbers::sqrt2);
    row.ci_lo = estimate - zq * se;
    row.ci_hi = estimate + zq * se;
    return row;
}

std::vector<WaldRow> wald_inference(const FitResult& fit, const Dataset& data, double level) {
    const Eigen::VectorXd est = fit.theta.packed();
    const Eigen::Index k = est.size();
    std::vector<std::string> names;
    for (Eigen::Index j = 0; j < data.p(); ++j) {
        const auto u = static_cast<std::size_t>(j);
        names.push_back("mean:" + (u < data.mean_names.size() ? data.mean_names[u] : "x" + std::to_string(j + 1)));
    }
    for (Eigen::Index j = 0; j < data.q(); ++j) {
        const auto u = static_cast<std::size_t>(j);
        names.push_back("precision:" +
                        (u < data.precision_names.size() ? data.precision_names[u] : "v" + std::to_string(j + 1)));
    }

    const Eigen::MatrixXd info = 0.5 * (fit.observed_information + fit.observed_information.transpose());
    if (info.rows() != k) throw std::runtime_error("fit carries no information matrix");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(info);
    const double top = eig.eigenvalues().cwiseAbs().maxCoeff();
    if (!(eig.eigenvalues().minCoeff() > 1e-12 * std::max(top, 1e-300))) {
        Eigen::Index worst = 0;
        eig.eigenvectors().col(0).cwiseAbs().maxCoeff(&worst);
        throw std::runtime_error("singular information matrix; the direction of the smallest eigenvalue "
                                 "is dominated by column '" + names[static_cast<std::size_t>(worst)] + "'");
    }
    const Eigen::VectorXd se = standard_errors(info);
    std::vector<WaldRow> rows;
    for (Eigen::Index j = 0; j < k; ++j) {
        rows.push_back(wald_row(names[static_cast<std::size_t>(j)], est[j], se[j], level));
    }
    return rows;
}

}  // namespace bessreg
