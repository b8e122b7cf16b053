#include "bessreg/diagnostics.hpp"

#include "bessreg/distributions.hpp"
#include "bessreg/parallel.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bessreg::diag {
namespace {

double g_of(Model m, double phi) { return m == Model::bessel ? g_bessel(phi) : g_beta(phi); }

double normal_quantile(double u) { return boost::math::quantile(boost::math::normal(), u); }

bool usable(const FitResult& f) { return f.converged && f.theta.packed().allFinite(); }

FitResult refit(Model model, const Dataset& d, const Theta& init) {
    if (model == Model::bessel) {
        EmOptions o;
        o.compute_information = false;
        return fit_bessel_em(d, init, o);
    }
    BetaOptions o;
    o.compute_information = false;
    return fit_beta_ml(d, init, o);
}

}  // namespace

Eigen::VectorXd pearson_residuals(const FitResult& fit, const Dataset& data) {
    const auto lp = linked_params(fit.theta, data);
    Eigen::VectorXd r(data.n());
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        const double mu = lp.mu[i];
        r[i] = (data.z[i] - mu) / std::sqrt(mu * (1.0 - mu) * g_of(fit.model, lp.phi[i]));
    }
    return r;
}

Eigen::VectorXd quantile_residuals(const FitResult& fit, const Dataset& data, std::size_t* clamped) {
    const auto lp = linked_params(fit.theta, data);
    Eigen::VectorXd r(data.n());
    std::size_t count = 0;
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        double u = fit.model == Model::bessel ? bessel_cdf({lp.mu[i], lp.phi[i]}, data.z[i])
                                              : beta_cdf({lp.mu[i], lp.phi[i]}, data.z[i]);
        if (u < 1e-12 || u > 1.0 - 1e-12) {
            u = std::clamp(u, 1e-12, 1.0 - 1e-12);
            ++count;
        }
        r[i] = normal_quantile(u);
    }
    if (clamped) *clamped = count;
    return r;
}

std::string to_string(ResidualKind k) { return k == ResidualKind::pearson ? "pearson" : "quantile"; }

ResidualKind residual_kind_from_string(const std::string& s) {
    if (s == "pearson") return ResidualKind::pearson;
    if (s == "quantile") return ResidualKind::quantile;
    throw std::invalid_argument("unknown residual kind '" + s + "' (expected pearson or quantile)");
}

Eigen::VectorXd residuals(ResidualKind kind, const FitResult& fit, const Dataset& data) {
    return kind == ResidualKind::pearson ? pearson_residuals(fit, data) : quantile_residuals(fit, data);
}

Eigen::VectorXd simulate_response(const FitResult& fit, const Dataset& data, Rng& rng, std::size_t* clamped) {
    const auto lp = linked_params(fit.theta, data);
    Eigen::VectorXd z(data.n());
    std::size_t count = 0;
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        double v = fit.model == Model::bessel ? sample_bessel({lp.mu[i], lp.phi[i]}, rng)
                                              : sample_beta({lp.mu[i], lp.phi[i]}, rng);
        if (v < 1e-9 || v > 1.0 - 1e-9) {
            v = std::clamp(v, 1e-9, 1.0 - 1e-9);
            ++count;
        }
        z[i] = v;
    }
    if (clamped) *clamped = count;
    return z;
}

std::pair<int, int> band_rows(int replications, double coverage) {
    const double b = replications;
    const int lo = static_cast<int>(std::ceil(b * (1.0 - coverage) / 2.0 - 1e-9));
    const int hi = static_cast<int>(std::floor(b * (1.0 + coverage) / 2.0 + 1e-9));
    return {std::clamp(lo, 1, replications), std::clamp(hi, 1, replications)};
}

EnvelopeResult simulated_envelope(const FitResult& fit, const Dataset& data, const EnvelopeOptions& opts) {
    if (opts.replications < 1) throw std::invalid_argument("envelope needs at least one replication");
    if (!(opts.coverage > 0.0 && opts.coverage < 1.0)) throw std::invalid_argument("coverage must lie in (0,1)");
    const Eigen::Index n = data.n();
    const auto reps = static_cast<std::size_t>(opts.replications);

    std::vector<Eigen::VectorXd> rows(reps);
    std::vector<char> ok(reps, 0), retried(reps, 0);
    std::vector<std::size_t> clamps(reps, 0);
    parallel_for(reps, opts.threads, [&](std::size_t b) {
        Rng rng = make_stream(opts.seed, b, StreamTag::envelope);
        Dataset d = data;
        d.z = simulate_response(fit, data, rng, &clamps[b]);
        FitResult f;
        bool good = false;
        try {
            f = refit(fit.model, d, fit.theta);
            good = usable(f);
        } catch (const std::exception&) {
        }
        if (!good) {
            retried[b] = 1;
            Rng jr = make_stream(opts.seed, b, StreamTag::jitter);
            std::normal_distribution<double> nd(0.0, 0.1);
            Eigen::VectorXd v = fit.theta.packed();
            for (Eigen::Index j = 0; j < v.size(); ++j) v[j] += nd(jr);
            try {
                f = refit(fit.model, d, Theta::unpack(v, data.p()));
                good = usable(f);
            } catch (const std::exception&) {
            }
        }
        if (!good) return;
        Eigen::VectorXd r = residuals(opts.kind, f, d);
        std::sort(r.data(), r.data() + n);
        rows[b] = std::move(r);
        ok[b] = 1;
    });

    EnvelopeResult res;
    res.model = fit.model;
    res.kind = opts.kind;
    std::vector<const Eigen::VectorXd*> kept;
    for (std::size_t b = 0; b < reps; ++b) {
        res.retried += retried[b];
        res.simulated_clamped += clamps[b];
        if (ok[b]) kept.push_back(&rows[b]);
    }
    res.replications = static_cast<int>(kept.size());
    res.dropped = opts.replications - res.replications;
    if (kept.empty()) throw std::runtime_error("every envelope replication failed to refit");
    const auto [lo, hi] = band_rows(res.replications, opts.coverage);
    res.lower_row = lo;
    res.upper_row = hi;

    res.observed = residuals(opts.kind, fit, data);
    std::sort(res.observed.data(), res.observed.data() + n);
    res.lower.resize(n);
    res.upper.resize(n);
    res.mean.resize(n);
    res.theoretical.resize(n);
    std::vector<double> col(kept.size());
    int inside = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        double sum = 0.0;
        for (std::size_t b = 0; b < kept.size(); ++b) {
            col[b] = (*kept[b])[i];
            sum += col[b];
        }
        std::sort(col.begin(), col.end());
        res.lower[i] = col[static_cast<std::size_t>(lo - 1)];
        res.upper[i] = col[static_cast<std::size_t>(hi - 1)];
        res.mean[i] = sum / static_cast<double>(kept.size());
        res.theoretical[i] = normal_quantile((static_cast<double>(i + 1) - 0.375) / (static_cast<double>(n) + 0.25));
        if (res.observed[i] >= res.lower[i] && res.observed[i] <= res.upper[i]) ++inside;
    }
    res.coverage_pct = 100.0 * inside / static_cast<double>(n);
    return res;
}

std::vector<Eigen::Index> test_rows(std::uint64_t seed, int k, Eigen::Index n, int test_size) {
    if (test_size < 1 || test_size >= n) throw std::invalid_argument("test size must lie in [1, n)");
    Rng rng = make_stream(seed, static_cast<std::uint64_t>(k), StreamTag::partition);
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
    // Partial Fisher-Yates: the first test_size slots form a uniform subset.
    for (int j = 0; j < test_size; ++j) {
        std::uniform_int_distribution<Eigen::Index> pick(j, n - 1);
        std::swap(idx[static_cast<std::size_t>(j)], idx[static_cast<std::size_t>(pick(rng))]);
    }
    idx.resize(static_cast<std::size_t>(test_size));
    std::sort(idx.begin(), idx.end());
    return idx;
}

std::uint64_t split_hash(const std::vector<Eigen::Index>& rows) {
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
    for (const auto r : rows) {
        auto v = static_cast<std::uint64_t>(r);
        for (int b = 0; b < 8; ++b, v >>= 8) {
            h ^= v & 0xFF;
            h *= 1099511628211ULL;
        }
    }
    return h;
}

double rss(const FitResult& fit, const Dataset& test) { return pearson_residuals(fit, test).squaredNorm(); }

double fsmd(const FitResult& fit, const Dataset& test) {
    const auto lp = linked_params(fit.theta, test);
    double s = 0.0;
    for (Eigen::Index i = 0; i < test.n(); ++i) {
        const double mu = lp.mu[i], z = test.z[i];
        const double second = mu * (1.0 - mu) * g_of(fit.model, lp.phi[i]) + mu * mu;
        s += std::abs(z - mu) + std::abs(z * z - second);
    }
    return s;
}

CvResult cross_validate(const Dataset& data, const CvOptions& opts) {
    const Eigen::Index n = data.n();
    if (opts.partitions < 1) throw std::invalid_argument("need at least one partition");
    if (n <= opts.test_size + data.p() + data.q()) throw std::invalid_argument("need n > test size + p + q");
    const auto parts = static_cast<std::size_t>(opts.partitions);

    struct Slot {
        bool ok = false;
        double rss[2], fsmd[2];
        std::uint64_t hash[2];
    };
    std::vector<Slot> slots(parts);
    parallel_for(parts, opts.threads, [&](std::size_t k) {
        Slot s;
        for (int m = 0; m < 2; ++m) {
            const Model model = m == 0 ? Model::bessel : Model::beta;
            // Each model rebuilds its split from the shared stream.
            const auto rows = test_rows(opts.seed, static_cast<int>(k), n, opts.test_size);
            std::vector<Eigen::Index> train;
            train.reserve(static_cast<std::size_t>(n - opts.test_size));
            for (Eigen::Index i = 0, t = 0; i < n; ++i) {
                if (t < static_cast<Eigen::Index>(rows.size()) && rows[static_cast<std::size_t>(t)] == i) {
                    ++t;
                } else {
                    train.push_back(i);
                }
            }
            const Dataset tr = data.subset(train), te = data.subset(rows);
            FitResult f;
            try {
                f = refit(model, tr, default_init(tr, model));
            } catch (const std::exception&) {
                return;
            }
            if (!usable(f)) return;
            s.rss[m] = rss(f, te);
            s.fsmd[m] = fsmd(f, te);
            s.hash[m] = split_hash(rows);
        }
        s.ok = true;
        slots[k] = s;
    });

    CvResult out;
    out.test_size = opts.test_size;
    out.seed = opts.seed;
    for (std::size_t k = 0; k < parts; ++k) {
        const Slot& s = slots[k];
        if (!s.ok) {
            ++out.dropped;
            continue;
        }
        out.partition.push_back(static_cast<int>(k));
        out.rss_bessel.push_back(s.rss[0]);
        out.rss_beta.push_back(s.rss[1]);
        out.fsmd_bessel.push_back(s.fsmd[0]);
        out.fsmd_beta.push_back(s.fsmd[1]);
        out.rss_ratio.push_back(s.rss[0] / s.rss[1]);
        out.fsmd_ratio.push_back(s.fsmd[0] / s.fsmd[1]);
        out.split_hash_bessel.push_back(s.hash[0]);
        out.split_hash_beta.push_back(s.hash[1]);
    }
    return out;
}

double fraction_below_one(const std::vector<double>& ratios) {
    if (ratios.empty()) return 0.0;
    const auto below = std::count_if(ratios.begin(), ratios.end(), [](double r) { return r < 1.0; });
    return static_cast<double>(below) / static_cast<double>(ratios.size());
}

std::vector<double> vif(const Eigen::MatrixXd& columns) {
    const Eigen::Index n = columns.rows(), k = columns.cols();
    std::vector<double> out(static_cast<std::size_t>(k));
    for (Eigen::Index j = 0; j < k; ++j) {
        const Eigen::VectorXd y = columns.col(j);
        const double tss = (y.array() - y.mean()).square().sum();
        Eigen::MatrixXd others(n, k);
        others.col(0).setOnes();
        for (Eigen::Index c = 0, o = 1; c < k; ++c) {
            if (c != j) others.col(o++) = columns.col(c);
        }
        const Eigen::VectorXd beta = others.colPivHouseholderQr().solve(y);
        const double rss = (y - others * beta).squaredNorm();
        const double r2 = tss > 0.0 ? 1.0 - rss / tss : 1.0;
        out[static_cast<std::size_t>(j)] =
            r2 >= 1.0 - 1e-12 ? std::numeric_limits<double>::infinity() : 1.0 / (1.0 - r2);
    }
    return out;
}

VifResult vif_select(const Eigen::MatrixXd& columns, const std::vector<std::string>& names, double threshold) {
    if (columns.cols() != static_cast<Eigen::Index>(names.size())) {
        throw std::invalid_argument("one name per candidate column required");
    }
    if (columns.cols() < 2) throw std::invalid_argument("VIF selection needs at least two columns");
    VifResult res;
    std::vector<Eigen::Index> active(static_cast<std::size_t>(columns.cols()));
    for (Eigen::Index j = 0; j < columns.cols(); ++j) active[static_cast<std::size_t>(j)] = j;
    for (;;) {
        Eigen::MatrixXd cur(columns.rows(), static_cast<Eigen::Index>(active.size()));
        for (std::size_t a = 0; a < active.size(); ++a) cur.col(static_cast<Eigen::Index>(a)) = columns.col(active[a]);
        const auto v = active.size() >= 2 ? vif(cur) : std::vector<double>(active.size(), 1.0);
        const auto worst = std::max_element(v.begin(), v.end());
        if (active.size() < 2 || *worst < threshold) {
            for (std::size_t a = 0; a < active.size(); ++a) res.kept.push_back(names[static_cast<std::size_t>(active[a])]);
            res.final_vif = v;
            return res;
        }
        const auto a = static_cast<std::size_t>(worst - v.begin());
        res.trace.push_back({names[static_cast<std::size_t>(active[a])], *worst, std::isinf(*worst)});
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(a));
    }
}

}  // namespace bessreg::diag
