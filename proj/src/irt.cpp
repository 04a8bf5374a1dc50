#include "irtime/irt.hpp"

#include <algorithm>
#include <cmath>

#include "irtime/common.hpp"

namespace irtime {

namespace {

int sorted_index(const std::vector<std::string>& ids, const std::string& id) {
    auto it = std::lower_bound(ids.begin(), ids.end(), id);
    if (it == ids.end() || *it != id) return -1;
    return static_cast<int>(it - ids.begin());
}

} // namespace

int Irt2plParams::task_index(const std::string& id) const { return sorted_index(task_ids, id); }
int Irt2plParams::model_index(const std::string& id) const { return sorted_index(model_ids, id); }

void PriorConfig::validate() const {
    if (!(theta_sd > 0) || !(b_mean_prior_sd > 0) || !(b_scale_prior_sd > 0) ||
        !(a_log_sd > 0) || !(a_max > 0) || !(b_scale_min > 0))
        throw ValidationError("prior scale hyperparameters must be positive");
    if (!(prob_clamp > 0) || !(prob_clamp < 0.5))
        throw ValidationError("probability clamp must lie in (0, 0.5)");
}

std::string estimator_name(Estimator e) { return e == Estimator::map ? "map" : "mcmc"; }

Estimator parse_estimator(const std::string& name) {
    if (name == "map") return Estimator::map;
    if (name == "mcmc") return Estimator::mcmc;
    throw ValidationError("unknown estimator '" + name + "' (expected map or mcmc)");
}

double sigmoid(double x) {
    if (x >= 0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    double e = std::exp(x);
    return e / (1.0 + e);
}

double irf(double a, double b, double theta) {
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(theta))
        throw ValidationError("irf: non-finite input");
    if (a < 0) throw ValidationError("irf: discrimination must be >= 0");
    return sigmoid(a * (theta - b));
}

double log_odds(double p) {
    if (!std::isfinite(p) || p <= 0.0 || p >= 1.0)
        throw ValidationError("log_odds: p must lie strictly inside (0, 1)");
    return std::log(p / (1.0 - p));
}

double bernoulli_loglik(double z, bool success) {
    // log sigmoid(z) = -softplus(-z); log(1 - sigmoid(z)) = -softplus(z)
    double t = success ? -z : z;
    // softplus(t) = log(1 + e^t), stable for large |t|
    double sp = t > 30.0 ? t : std::log1p(std::exp(t));
    return -sp;
}

double log_likelihood(const ResponseMatrix& matrix, const Irt2plParams& params) {
    if (params.a.size() != matrix.n_tasks() || params.b.size() != matrix.n_tasks() ||
        params.theta.size() != matrix.n_models())
        throw ValidationError("log_likelihood: parameter dimensions do not match matrix");
    // p clamped to [1e-12, 1 - 1e-12], expressed as a bound on the logit
    const double z_limit = 27.631021115928547; // -log_odds(1e-12)
    double ll = 0.0;
    for (const Cell& c : matrix.cells) {
        double z = params.a[c.task] * (params.theta[c.model] - params.b[c.task]);
        ll += bernoulli_loglik(std::clamp(z, -z_limit, z_limit), c.outcome != 0);
    }
    return ll;
}

std::size_t packed_size(const ResponseMatrix& matrix) {
    return 2 * matrix.n_tasks() + matrix.n_models() + 2;
}

namespace {

struct PackedView {
    std::span<const double> log_a, b, theta;
    double mu_b, log_sigma_b;
};

PackedView unpack(const ResponseMatrix& m, std::span<const double> x) {
    std::size_t t = m.n_tasks(), k = m.n_models();
    return PackedView{x.subspan(0, t), x.subspan(t, t), x.subspan(2 * t, k), x[2 * t + k],
                      x[2 * t + k + 1]};
}

constexpr double kLogSqrt2Pi = 0.91893853320467274178; // log sqrt(2*pi)

} // namespace

double log_posterior_grad(const ResponseMatrix& matrix, const PriorConfig& priors,
                          std::span<const double> x, std::span<double> grad) {
    const std::size_t T = matrix.n_tasks(), M = matrix.n_models();
    if (x.size() != packed_size(matrix))
        throw ValidationError("log_posterior: packed vector has wrong length");
    bool want_grad = !grad.empty();
    if (want_grad) {
        if (grad.size() != x.size())
            throw ValidationError("log_posterior: gradient span has wrong length");
        std::fill(grad.begin(), grad.end(), 0.0);
    }

    PackedView v = unpack(matrix, x);
    const double sigma_b = std::exp(v.log_sigma_b);

    double lp = 0.0;
    // likelihood over observed cells; gradients accumulate into
    // [d/dlog_a, d/db, d/dtheta]
    for (std::size_t i = 0; i < T; ++i) {
        const double a = std::exp(v.log_a[i]);
        const double b = v.b[i];
        for (const Cell& c : matrix.task_row(i)) {
            const double theta = v.theta[c.model];
            const double z = a * (theta - b);
            lp += bernoulli_loglik(z, c.outcome != 0);
            if (want_grad) {
                const double resid = (c.outcome != 0 ? 1.0 : 0.0) - sigmoid(z);
                grad[i] += z * resid;            // d/dlog_a = z * (y - p)
                grad[T + i] += -a * resid;       // d/db
                grad[2 * T + c.model] += a * resid;
            }
        }
    }

    // theta ~ N(0, theta_sd)
    const double tv = priors.theta_sd * priors.theta_sd;
    for (std::size_t j = 0; j < M; ++j) {
        lp += -0.5 * v.theta[j] * v.theta[j] / tv - std::log(priors.theta_sd) - kLogSqrt2Pi;
        if (want_grad) grad[2 * T + j] += -v.theta[j] / tv;
    }

    // b ~ N(mu_b, sigma_b)
    const double bv = sigma_b * sigma_b;
    double sum_sq = 0.0, sum_dev = 0.0;
    for (std::size_t i = 0; i < T; ++i) {
        const double dev = v.b[i] - v.mu_b;
        sum_sq += dev * dev;
        sum_dev += dev;
        if (want_grad) grad[T + i] += -dev / bv;
    }
    lp += -0.5 * sum_sq / bv - double(T) * (v.log_sigma_b + kLogSqrt2Pi);

    // a ~ LogNormal(0, a_log_sd): in log_a coordinates the density term is
    // -log_a - log_a^2 / (2 s^2) up to constants
    const double av = priors.a_log_sd * priors.a_log_sd;
    for (std::size_t i = 0; i < T; ++i) {
        lp += -v.log_a[i] - 0.5 * v.log_a[i] * v.log_a[i] / av - std::log(priors.a_log_sd) -
              kLogSqrt2Pi;
        if (want_grad) grad[i] += -1.0 - v.log_a[i] / av;
    }

    // mu_b ~ N(0, b_mean_prior_sd)
    const double mv = priors.b_mean_prior_sd * priors.b_mean_prior_sd;
    lp += -0.5 * v.mu_b * v.mu_b / mv - std::log(priors.b_mean_prior_sd) - kLogSqrt2Pi;

    // sigma_b ~ HalfNormal(b_scale_prior_sd)
    const double sv = priors.b_scale_prior_sd * priors.b_scale_prior_sd;
    lp += -0.5 * bv / sv + std::log(2.0) - std::log(priors.b_scale_prior_sd) - kLogSqrt2Pi;

    if (want_grad) {
        grad[2 * T + M] = sum_dev / bv - v.mu_b / mv;
        grad[2 * T + M + 1] = -double(T) + sum_sq / bv - bv / sv;
    }
    return lp;
}

double log_posterior(const ResponseMatrix& matrix, const PriorConfig& priors,
                     std::span<const double> x) {
    return log_posterior_grad(matrix, priors, x, {});
}

ProbMatrix predict_matrix(const Irt2plParams& params, std::span<const std::string> task_ids,
                          std::span<const std::string> model_ids) {
    ProbMatrix out;
    out.task_ids.assign(task_ids.begin(), task_ids.end());
    out.model_ids.assign(model_ids.begin(), model_ids.end());
    out.p.reserve(task_ids.size() * model_ids.size());

    std::vector<int> mj(model_ids.size());
    for (std::size_t j = 0; j < model_ids.size(); ++j) {
        mj[j] = params.model_index(model_ids[j]);
        if (mj[j] < 0) throw ValidationError("predict_matrix: unknown model '" + model_ids[j] + "'");
    }
    for (const std::string& tid : task_ids) {
        int ti = params.task_index(tid);
        if (ti < 0) throw ValidationError("predict_matrix: unknown task '" + tid + "'");
        for (std::size_t j = 0; j < model_ids.size(); ++j)
            out.p.push_back(irf(params.a[ti], params.b[ti], params.theta[mj[j]]));
    }
    return out;
}

} // namespace irtime
