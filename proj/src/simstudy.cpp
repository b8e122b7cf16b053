#include "bessreg/simstudy.hpp"

#include "bessreg/dbb.hpp"
#include "bessreg/distributions.hpp"
#include "bessreg/parallel.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bessreg::sim {
namespace {

double logistic(double x) {
    return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

Eigen::MatrixXd design(Eigen::Index n, Eigen::Index k, Rng& rng) {
    Eigen::MatrixXd m(n, k);
    std::bernoulli_distribution bern(0.5);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < k; ++j) {
            m(i, j) = j == 0 ? 1.0 : (j % 2 == 1 ? (bern(rng) ? 1.0 : 0.0) : unif(rng));
        }
    }
    return m;
}

std::vector<std::string> names(const char* prefix, Eigen::Index k) {
    std::vector<std::string> out;
    for (Eigen::Index j = 0; j < k; ++j) out.push_back(j == 0 ? "(intercept)" : prefix + std::to_string(j));
    return out;
}

}  // namespace

std::string to_string(Generator g) {
    switch (g) {
        case Generator::bessel: return "bessel";
        case Generator::beta: return "beta";
        case Generator::beta_contaminated: return "beta_contaminated";
    }
    return "unknown";
}

Generator generator_from_string(const std::string& s) {
    if (s == "bessel") return Generator::bessel;
    if (s == "beta") return Generator::beta;
    if (s == "beta_contaminated") return Generator::beta_contaminated;
    throw std::invalid_argument("unknown generator '" + s + "'");
}

void Config::validate() const {
    if (n < 2) throw std::invalid_argument("n must be at least 2");
    if (replications < 1) throw std::invalid_argument("replications must be at least 1");
    if (kappa.size() < 1 || lambda.size() < 1) throw std::invalid_argument("kappa and lambda need an intercept");
    if (kappa.size() + lambda.size() >= n) throw std::invalid_argument("need p + q < n");
    if (!(contamination_prob >= 0.0 && contamination_prob <= 1.0)) {
        throw std::invalid_argument("contamination probability must lie in [0,1]");
    }
    if (!(contamination_mu > 0.0 && contamination_mu < 1.0) || !(contamination_phi > 0.0)) {
        throw std::invalid_argument("contamination mean must lie in (0,1) and precision be positive");
    }
}

Dataset gen_dataset(const Config& cfg, int rep, std::vector<char>* contaminated) {
    const Eigen::Index n = cfg.n;
    const Eigen::Index p = cfg.kappa.size(), q = cfg.lambda.size();
    Rng cov = make_stream(cfg.seed, cfg.fixed_covariates ? 0 : static_cast<std::uint64_t>(rep), StreamTag::covariates);
    Dataset d;
    d.X = design(n, p, cov);
    d.V = q == 1 ? Eigen::MatrixXd::Ones(n, 1) : design(n, q, cov);
    d.mean_names = names("x", p);
    d.precision_names = names("v", q);

    Rng resp = make_stream(cfg.seed, static_cast<std::uint64_t>(rep), StreamTag::response);
    Rng cont = make_stream(cfg.seed, static_cast<std::uint64_t>(rep), StreamTag::contamination);
    std::bernoulli_distribution switch_draw(cfg.generator == Generator::beta_contaminated ? cfg.contamination_prob : 0.0);
    const Eigen::VectorXd eta = d.X * cfg.kappa;
    const Eigen::VectorXd lphi = d.V * cfg.lambda;
    d.z.resize(n);
    if (contaminated) contaminated->assign(static_cast<std::size_t>(n), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
        double mu = logistic(eta[i]);
        double phi = std::exp(lphi[i]);
        double z;
        if (cfg.generator == Generator::bessel) {
            z = sample_bessel({mu, phi}, resp);
        } else {
            if (cfg.generator == Generator::beta_contaminated && switch_draw(cont)) {
                mu = cfg.contamination_mu;
                phi = cfg.contamination_phi;
                if (contaminated) (*contaminated)[static_cast<std::size_t>(i)] = 1;
            }
            z = sample_beta({mu, phi}, resp);
        }
        d.z[i] = std::clamp(z, 1e-9, 1.0 - 1e-9);
    }
    return d;
}

Eigen::VectorXd relative_bias(const Eigen::MatrixXd& estimates, const Eigen::VectorXd& truth) {
    if (estimates.cols() != truth.size()) throw std::invalid_argument("estimate/truth length mismatch");
    for (Eigen::Index j = 0; j < truth.size(); ++j) {
        if (truth[j] == 0.0) {
            throw std::invalid_argument("relative bias undefined for a zero true value (entry " +
                                        std::to_string(j + 1) + "); use the plain bias");
        }
    }
    Eigen::VectorXd out = Eigen::VectorXd::Zero(truth.size());
    for (Eigen::Index r = 0; r < estimates.rows(); ++r) {
        out += ((estimates.row(r).transpose() - truth).array() / truth.array()).abs().matrix();
    }
    return out / static_cast<double>(std::max<Eigen::Index>(estimates.rows(), 1));
}

Report run_mc(const Config& cfg) {
    cfg.validate();
    const auto reps = static_cast<std::size_t>(cfg.replications);
    const Eigen::Index k = cfg.kappa.size() + cfg.lambda.size();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    Eigen::VectorXd truth(k);
    truth << cfg.kappa, cfg.lambda;

    Report rep;
    rep.config = cfg;
    for (const Model m : cfg.fit_models) {
        ModelSummary s;
        s.model = m;
        s.estimates = Eigen::MatrixXd::Constant(cfg.replications, k, nan);
        s.std_errors = Eigen::MatrixXd::Constant(cfg.replications, k, nan);
        s.converged.assign(reps, 0);
        rep.models.push_back(std::move(s));
    }
    if (cfg.run_dbb) rep.dbb_decisions.assign(reps, std::nullopt);

    parallel_for(reps, cfg.threads, [&](std::size_t r) {
        const Dataset d = gen_dataset(cfg, static_cast<int>(r));
        for (auto& s : rep.models) {
            try {
                const FitResult f = fit_model(s.model, d);
                if (!f.converged || !f.theta.packed().allFinite()) continue;
                s.estimates.row(static_cast<Eigen::Index>(r)) = f.theta.packed().transpose();
                s.std_errors.row(static_cast<Eigen::Index>(r)) = f.std_errors.transpose();
                s.converged[r] = 1;
            } catch (const std::exception&) {
            }
        }
        if (cfg.run_dbb) {
            try {
                rep.dbb_decisions[r] = dbb::dbb_test(d).decision;
            } catch (const std::exception&) {
            }
        }
    });

    const double zq = boost::math::quantile(boost::math::normal(), 0.5 + 0.5 * cfg.level);
    for (auto& s : rep.models) {
        std::vector<Eigen::Index> ok;
        for (std::size_t r = 0; r < reps; ++r) {
            if (s.converged[r]) ok.push_back(static_cast<Eigen::Index>(r));
        }
        s.failures = cfg.replications - static_cast<int>(ok.size());
        Eigen::MatrixXd est(static_cast<Eigen::Index>(ok.size()), k), se(est.rows(), k);
        for (Eigen::Index i = 0; i < est.rows(); ++i) {
            est.row(i) = s.estimates.row(ok[static_cast<std::size_t>(i)]);
            se.row(i) = s.std_errors.row(ok[static_cast<std::size_t>(i)]);
        }
        const double m = static_cast<double>(est.rows());
        s.mean = est.colwise().mean().transpose();
        s.bias = s.mean - truth;
        s.mc_sd = Eigen::VectorXd::Constant(k, nan);
        if (est.rows() > 1) {
            s.mc_sd = ((est.rowwise() - s.mean.transpose()).array().square().colwise().sum() / (m - 1.0))
                          .sqrt()
                          .transpose();
        }
        s.mean_se = se.colwise().mean().transpose();
        s.abs_rel_bias = Eigen::VectorXd::Constant(k, nan);
        for (Eigen::Index j = 0; j < k; ++j) {
            if (truth[j] != 0.0) s.abs_rel_bias[j] = relative_bias(est.col(j), truth.segment(j, 1))[0];
        }
        s.coverage = Eigen::VectorXd::Zero(k);
        for (Eigen::Index i = 0; i < est.rows(); ++i) {
            for (Eigen::Index j = 0; j < k; ++j) {
                if (std::abs(est(i, j) - truth[j]) <= zq * se(i, j)) s.coverage[j] += 1.0;
            }
        }
        if (m > 0) s.coverage *= 100.0 / m;
    }
    if (cfg.run_dbb) {
        int ok = 0, bessel = 0;
        for (const auto& d : rep.dbb_decisions) {
            if (!d) continue;
            ++ok;
            if (*d == Model::bessel) ++bessel;
        }
        rep.dbb_failures = cfg.replications - ok;
        rep.dbb_bessel_rate = ok > 0 ? 100.0 * bessel / ok : 0.0;
    }
    return rep;
}

}  // namespace bessreg::sim
