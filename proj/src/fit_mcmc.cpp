#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "irtime/common.hpp"
#include "irtime/irt.hpp"
#include "irtime/rng.hpp"

// Componentwise random-walk Metropolis within Gibbs for the hierarchical
// 2PL posterior. Per-parameter proposal scales adapt toward a 0.44
// acceptance rate during warmup only; mu_b has a conjugate Gibbs draw.
// Chains own derived RNG streams, so results do not depend on scheduling.

namespace irtime {

namespace detail {
void curvature_standard_errors(const ResponseMatrix&, const PriorConfig&, const Irt2plParams&,
                               std::vector<double>&, std::vector<double>&, double);
void validate_matrix_for_fit(const ResponseMatrix&);
std::vector<bool> task_degenerate_flags(const ResponseMatrix&);
void recenter_params(Irt2plParams&, double*);
} // namespace detail

namespace {

struct ColumnIndex {
    // per model: (task index, outcome)
    std::vector<std::vector<std::pair<std::int32_t, std::uint8_t>>> cols;

    explicit ColumnIndex(const ResponseMatrix& m) : cols(m.n_models()) {
        for (const Cell& c : m.cells) cols[c.model].emplace_back(c.task, c.outcome);
    }
};

struct ChainDraws {
    // draw-major storage of recentered scalars
    std::vector<double> a, b, theta, mu, sigma;
    int kept = 0;
};

struct ChainState {
    std::vector<double> log_a, b, theta;
    double mu = 0.0, tau = 0.0; // tau = log sigma_b

    std::vector<double> step_log_a, step_b, step_theta;
    double step_tau = 0.3;
    std::vector<int> acc_log_a, acc_b, acc_theta;
    int acc_tau = 0;
};

constexpr int kAdaptBlock = 50;
constexpr double kTargetAccept = 0.44;

double adapt_scale(int accepts) {
    return std::exp(static_cast<double>(accepts) / kAdaptBlock - kTargetAccept);
}

class Sampler {
public:
    Sampler(const ResponseMatrix& m, const ColumnIndex& cols, const PriorConfig& priors)
        : m_(m), cols_(cols), priors_(priors),
          z_limit_(-std::log(priors.prob_clamp / (1.0 - priors.prob_clamp))) {}

    std::uint64_t clamp_events = 0;

    double cell_loglik(double a, double b, double theta, bool success) {
        double z = a * (theta - b);
        if (z > z_limit_) {
            z = z_limit_;
            ++clamp_events;
        } else if (z < -z_limit_) {
            z = -z_limit_;
            ++clamp_events;
        }
        return bernoulli_loglik(z, success);
    }

    double task_loglik(const ChainState& s, std::size_t i, double log_a, double b) {
        const double a = std::exp(log_a);
        double ll = 0.0;
        for (const Cell& c : m_.task_row(i))
            ll += cell_loglik(a, b, s.theta[c.model], c.outcome != 0);
        return ll;
    }

    double model_loglik(const ChainState& s, std::size_t j, double theta) {
        double ll = 0.0;
        for (const auto& [task, outcome] : cols_.cols[j])
            ll += cell_loglik(std::exp(s.log_a[task]), s.b[task], theta, outcome != 0);
        return ll;
    }

    ChainDraws run_chain(Rng rng, int draws, int warmup) {
        const std::size_t T = m_.n_tasks(), M = m_.n_models();
        ChainState s;
        s.log_a.resize(T);
        s.b.resize(T);
        s.theta.resize(M);
        for (std::size_t i = 0; i < T; ++i) s.log_a[i] = 0.3 * rng.normal();
        for (std::size_t i = 0; i < T; ++i) s.b[i] = rng.normal();
        for (std::size_t j = 0; j < M; ++j) s.theta[j] = rng.normal();
        s.step_log_a.assign(T, 0.3);
        s.step_b.assign(T, 0.5);
        s.step_theta.assign(M, 0.3);
        s.acc_log_a.assign(T, 0);
        s.acc_b.assign(T, 0);
        s.acc_theta.assign(M, 0);

        const double log_a_max = std::log(priors_.a_max);
        const double theta_var = priors_.theta_sd * priors_.theta_sd;
        const double mu_var = priors_.b_mean_prior_sd * priors_.b_mean_prior_sd;
        const double scale_var = priors_.b_scale_prior_sd * priors_.b_scale_prior_sd;
        const double a_log_var = priors_.a_log_sd * priors_.a_log_sd;

        ChainDraws out;
        const int kept = draws - warmup;
        out.a.reserve(static_cast<std::size_t>(kept) * T);
        out.b.reserve(static_cast<std::size_t>(kept) * T);
        out.theta.reserve(static_cast<std::size_t>(kept) * M);

        for (int iter = 0; iter < draws; ++iter) {
            double sigma_b = std::exp(s.tau);
            double b_var = sigma_b * sigma_b;

            for (std::size_t j = 0; j < M; ++j) {
                const double cur = s.theta[j];
                const double prop = cur + s.step_theta[j] * rng.normal();
                const double delta = model_loglik(s, j, prop) - model_loglik(s, j, cur) -
                                     0.5 * (prop * prop - cur * cur) / theta_var;
                if (delta >= 0 || std::log(rng.uniform_open()) < delta) {
                    s.theta[j] = prop;
                    ++s.acc_theta[j];
                }
            }

            for (std::size_t i = 0; i < T; ++i) {
                const double cur = s.b[i];
                const double prop = cur + s.step_b[i] * rng.normal();
                const double dev_p = prop - s.mu, dev_c = cur - s.mu;
                const double delta = task_loglik(s, i, s.log_a[i], prop) -
                                     task_loglik(s, i, s.log_a[i], cur) -
                                     0.5 * (dev_p * dev_p - dev_c * dev_c) / b_var;
                if (delta >= 0 || std::log(rng.uniform_open()) < delta) {
                    s.b[i] = prop;
                    ++s.acc_b[i];
                }
            }

            for (std::size_t i = 0; i < T; ++i) {
                const double cur = s.log_a[i];
                double prop = cur + s.step_log_a[i] * rng.normal();
                prop = std::min(prop, log_a_max);
                const double delta = task_loglik(s, i, prop, s.b[i]) -
                                     task_loglik(s, i, cur, s.b[i]) -
                                     0.5 * (prop * prop - cur * cur) / a_log_var;
                if (delta >= 0 || std::log(rng.uniform_open()) < delta) {
                    s.log_a[i] = prop;
                    ++s.acc_log_a[i];
                }
            }

            // mu_b | b, sigma_b: conjugate normal draw
            {
                const double sum_b = std::accumulate(s.b.begin(), s.b.end(), 0.0);
                const double post_var = 1.0 / (double(T) / b_var + 1.0 / mu_var);
                const double post_mean = post_var * (sum_b / b_var);
                s.mu = post_mean + std::sqrt(post_var) * rng.normal();
            }

            // log sigma_b: random walk on tau; target includes the Jacobian
            {
                double ss = 0.0;
                for (double b : s.b) {
                    const double dev = b - s.mu;
                    ss += dev * dev;
                }
                auto tau_target = [&](double tau) {
                    const double sig2 = std::exp(2.0 * tau);
                    return -double(T) * tau - 0.5 * ss / sig2 - 0.5 * sig2 / scale_var + tau;
                };
                const double prop = s.tau + s.step_tau * rng.normal();
                const double delta = tau_target(prop) - tau_target(s.tau);
                if (delta >= 0 || std::log(rng.uniform_open()) < delta) {
                    s.tau = prop;
                    ++s.acc_tau;
                }
            }

            if (iter < warmup && (iter + 1) % kAdaptBlock == 0) {
                for (std::size_t j = 0; j < M; ++j) {
                    s.step_theta[j] *= adapt_scale(s.acc_theta[j]);
                    s.acc_theta[j] = 0;
                }
                for (std::size_t i = 0; i < T; ++i) {
                    s.step_b[i] *= adapt_scale(s.acc_b[i]);
                    s.acc_b[i] = 0;
                    s.step_log_a[i] *= adapt_scale(s.acc_log_a[i]);
                    s.acc_log_a[i] = 0;
                }
                s.step_tau *= adapt_scale(s.acc_tau);
                s.acc_tau = 0;
            }

            if (iter >= warmup) {
                // store the identified (translation-fixed) parameters
                const double c = std::accumulate(s.theta.begin(), s.theta.end(), 0.0) /
                                 static_cast<double>(M);
                for (std::size_t i = 0; i < T; ++i) out.a.push_back(std::exp(s.log_a[i]));
                for (std::size_t i = 0; i < T; ++i) out.b.push_back(s.b[i] - c);
                for (std::size_t j = 0; j < M; ++j) out.theta.push_back(s.theta[j] - c);
                out.mu.push_back(s.mu - c);
                out.sigma.push_back(std::exp(s.tau));
                ++out.kept;
            }
        }
        return out;
    }

private:
    const ResponseMatrix& m_;
    const ColumnIndex& cols_;
    const PriorConfig& priors_;
    const double z_limit_;
};

// --- convergence diagnostics ----------------------------------------------

// Scalar series extractor: draws stored draw-major with stride `dim`.
struct SeriesView {
    const std::vector<double>* data;
    std::size_t dim, index, n;
    double at(std::size_t k) const { return (*data)[k * dim + index]; }
};

// Split-R-hat over m chains, each split in half.
double split_rhat(const std::vector<SeriesView>& chains) {
    const std::size_t half = chains.front().n / 2;
    if (half < 2) return 1.0;
    std::vector<double> means, vars;
    for (const SeriesView& c : chains) {
        for (int part = 0; part < 2; ++part) {
            const std::size_t lo = part == 0 ? 0 : half;
            double mean = 0.0;
            for (std::size_t k = 0; k < half; ++k) mean += c.at(lo + k);
            mean /= static_cast<double>(half);
            double var = 0.0;
            for (std::size_t k = 0; k < half; ++k) {
                const double d = c.at(lo + k) - mean;
                var += d * d;
            }
            var /= static_cast<double>(half - 1);
            means.push_back(mean);
            vars.push_back(var);
        }
    }
    const auto mcount = static_cast<double>(means.size());
    const double grand = std::accumulate(means.begin(), means.end(), 0.0) / mcount;
    double between = 0.0;
    for (double m : means) between += (m - grand) * (m - grand);
    between *= static_cast<double>(half) / (mcount - 1.0);
    const double within = std::accumulate(vars.begin(), vars.end(), 0.0) / mcount;
    if (within <= 0) return 1.0;
    const double n = static_cast<double>(half);
    const double var_plus = (n - 1.0) / n * within + between / n;
    return std::max(1.0, std::sqrt(var_plus / within));
}

// Effective sample size with combined-chain autocorrelations and Geyer's
// initial monotone positive sequence.
double effective_sample_size(const std::vector<SeriesView>& chains) {
    const std::size_t m = chains.size();
    const std::size_t n = chains.front().n;
    if (n < 4) return static_cast<double>(m * n);

    std::vector<double> means(m), vars(m);
    std::vector<std::vector<double>> centered(m);
    for (std::size_t c = 0; c < m; ++c) {
        double mean = 0.0;
        for (std::size_t k = 0; k < n; ++k) mean += chains[c].at(k);
        mean /= static_cast<double>(n);
        means[c] = mean;
        centered[c].resize(n);
        double ss = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            centered[c][k] = chains[c].at(k) - mean;
            ss += centered[c][k] * centered[c][k];
        }
        vars[c] = ss / static_cast<double>(n - 1);
    }
    const double within = std::accumulate(vars.begin(), vars.end(), 0.0) / double(m);
    double between = 0.0;
    if (m > 1) {
        const double grand = std::accumulate(means.begin(), means.end(), 0.0) / double(m);
        for (double mu : means) between += (mu - grand) * (mu - grand);
        between *= double(n) / double(m - 1);
    }
    const double var_plus = (double(n) - 1.0) / double(n) * within + between / double(n);
    if (var_plus <= 0 || within <= 0) return static_cast<double>(m * n);

    auto acov = [&](std::size_t c, std::size_t lag) {
        double s = 0.0;
        for (std::size_t k = 0; k + lag < n; ++k) s += centered[c][k] * centered[c][k + lag];
        return s / static_cast<double>(n);
    };

    auto rho_hat = [&](std::size_t lag) {
        double mean_acov = 0.0;
        for (std::size_t c = 0; c < m; ++c)
            mean_acov += acov(c, lag) * double(n) / (double(n) - 1.0);
        mean_acov /= double(m);
        return 1.0 - (within - mean_acov) / var_plus;
    };

    // tau = -1 + 2 * sum of Geyer pairs (rho_2k + rho_2k+1), truncated at the
    // first non-positive pair and capped to be non-increasing
    double tau = -1.0;
    double prev_pair = std::numeric_limits<double>::max();
    for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
        const double rho0 = k == 0 ? 1.0 : rho_hat(2 * k);
        const double rho1 = rho_hat(2 * k + 1);
        double pair = rho0 + rho1;
        if (pair <= 0) break;
        pair = std::min(pair, prev_pair);
        prev_pair = pair;
        tau += 2.0 * pair;
    }
    tau = std::max(tau, 1e-3);
    return std::min(static_cast<double>(m * n) / tau, static_cast<double>(m * n));
}

} // namespace

IrtFit fit_mcmc(const ResponseMatrix& matrix, const PriorConfig& priors, int chains, int draws,
                int warmup, std::uint64_t seed) {
    priors.validate();
    detail::validate_matrix_for_fit(matrix);
    if (chains < 2) throw ValidationError("fit_mcmc: need at least 2 chains for diagnostics");
    if (warmup < 0 || draws <= warmup)
        throw ValidationError("fit_mcmc: draws must exceed warmup");

    const std::size_t T = matrix.n_tasks(), M = matrix.n_models();
    ColumnIndex cols(matrix);
    Sampler sampler(matrix, cols, priors);

    std::vector<ChainDraws> chain_draws;
    chain_draws.reserve(static_cast<std::size_t>(chains));
    for (int c = 0; c < chains; ++c)
        chain_draws.push_back(
            sampler.run_chain(Rng::derive(seed, static_cast<std::uint64_t>(c)), draws, warmup));

    const int kept = chain_draws.front().kept;
    const double total = static_cast<double>(kept) * chains;

    IrtFit fit;
    fit.estimator = Estimator::mcmc;
    fit.seed = seed;
    fit.params.task_ids = matrix.task_ids;
    fit.params.model_ids = matrix.model_ids;
    fit.params.a.assign(T, 0.0);
    fit.params.b.assign(T, 0.0);
    fit.params.theta.assign(M, 0.0);
    fit.se_b.assign(T, 0.0);
    fit.se_theta.assign(M, 0.0);

    auto posterior_moments = [&](auto field, std::size_t dim, std::size_t idx) {
        double mean = 0.0;
        for (const ChainDraws& cd : chain_draws)
            for (int k = 0; k < kept; ++k) mean += (cd.*field)[std::size_t(k) * dim + idx];
        mean /= total;
        double ss = 0.0;
        for (const ChainDraws& cd : chain_draws)
            for (int k = 0; k < kept; ++k) {
                const double d = (cd.*field)[std::size_t(k) * dim + idx] - mean;
                ss += d * d;
            }
        return std::pair{mean, std::sqrt(ss / (total - 1.0))};
    };

    for (std::size_t i = 0; i < T; ++i) {
        fit.params.a[i] = posterior_moments(&ChainDraws::a, T, i).first;
        auto [mb, sb] = posterior_moments(&ChainDraws::b, T, i);
        fit.params.b[i] = mb;
        fit.se_b[i] = sb;
    }
    for (std::size_t j = 0; j < M; ++j) {
        auto [mt, st] = posterior_moments(&ChainDraws::theta, M, j);
        fit.params.theta[j] = mt;
        fit.se_theta[j] = st;
    }

    FitDiagnostics diag;
    diag.chains = chains;
    diag.draws_per_chain = kept;
    diag.warmup = warmup;
    diag.clamp_events = sampler.clamp_events;
    diag.b_mean = posterior_moments(&ChainDraws::mu, 1, 0).first;
    diag.b_scale = posterior_moments(&ChainDraws::sigma, 1, 0).first;

    // diagnostics over every reported scalar
    double worst_rhat = 1.0;
    double min_ess = total;
    auto scan = [&](const std::vector<double> ChainDraws::* field, std::size_t dim) {
        for (std::size_t idx = 0; idx < dim; ++idx) {
            std::vector<SeriesView> views;
            views.reserve(chain_draws.size());
            for (const ChainDraws& cd : chain_draws)
                views.push_back(SeriesView{&(cd.*field), dim, idx, std::size_t(kept)});
            worst_rhat = std::max(worst_rhat, split_rhat(views));
            min_ess = std::min(min_ess, effective_sample_size(views));
        }
    };
    scan(&ChainDraws::a, T);
    scan(&ChainDraws::b, T);
    scan(&ChainDraws::theta, M);

    diag.rhat_worst = worst_rhat;
    diag.effective_sample_size_min = min_ess;
    diag.converged = worst_rhat <= 1.1;

    detail::recenter_params(fit.params, &diag.b_mean);
    fit.unreliable = detail::task_degenerate_flags(matrix);
    fit.diagnostics = std::move(diag);
    return fit;
}

} // namespace irtime
