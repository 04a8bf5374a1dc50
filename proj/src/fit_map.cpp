#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include "irtime/common.hpp"
#include "irtime/irt.hpp"

// MAP companion to the MCMC fit: joint L-BFGS ascent on the penalized
// log-posterior over (log a, b, theta, mu_b, sigma_b). The discrimination
// bound is a projection (the LogNormal prior keeps it inactive in
// practice). sigma_b is optimized through a softplus floor at b_scale_min:
// the joint mode of a hierarchical scale is unbounded as sigma_b -> 0 on
// weakly informative data, so the optimizer approaches the floor smoothly
// instead of chasing the collapse. Deterministic for a given (matrix,
// priors, max_iters, tol); the seed is recorded for the output contract.

namespace irtime {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double softplus(double v) { return v > 30.0 ? v : std::log1p(std::exp(v)); }

void validate_fit_input(const ResponseMatrix& matrix) {
    if (matrix.n_tasks() < 2 || matrix.n_models() < 2)
        throw ValidationError("fit requires at least 2 tasks and 2 models");
    bool any0 = false, any1 = false;
    for (const Cell& c : matrix.cells) (c.outcome ? any1 : any0) = true;
    if (!any0 || !any1)
        throw ValidationError("fit requires both successes and failures in the matrix");
}

void recenter(Irt2plParams& params, double* b_mean) {
    double c = std::accumulate(params.theta.begin(), params.theta.end(), 0.0) /
               static_cast<double>(params.theta.size());
    for (double& t : params.theta) t -= c;
    for (double& b : params.b) b -= c;
    if (b_mean) *b_mean -= c;
}

std::vector<bool> degenerate_flags(const ResponseMatrix& matrix) {
    std::vector<bool> flags(matrix.n_tasks());
    for (std::size_t i = 0; i < matrix.n_tasks(); ++i)
        flags[i] = matrix.task_all_fail(i) || matrix.task_all_pass(i);
    return flags;
}

} // namespace

namespace detail {

// Observed-information standard errors at a point estimate: per-task 2x2
// blocks in (log a, b) and per-model scalars, priors included. Cross-task
// and cross-model curvature is ignored.
void curvature_standard_errors(const ResponseMatrix& matrix, const PriorConfig& priors,
                               const Irt2plParams& params, std::vector<double>& se_b,
                               std::vector<double>& se_theta, double sigma_b) {
    const std::size_t T = matrix.n_tasks(), M = matrix.n_models();
    se_b.assign(T, 0.0);
    se_theta.assign(M, 0.0);

    const double inv_bv = 1.0 / (sigma_b * sigma_b);
    const double inv_av = 1.0 / (priors.a_log_sd * priors.a_log_sd);
    std::vector<double> info_theta(M, 1.0 / (priors.theta_sd * priors.theta_sd));

    for (std::size_t i = 0; i < T; ++i) {
        const double a = params.a[i];
        double i_bb = inv_bv, i_aa = inv_av, i_ab = 0.0;
        for (const Cell& c : matrix.task_row(i)) {
            const double z = a * (params.theta[c.model] - params.b[i]);
            const double p = sigmoid(z);
            const double w = p * (1.0 - p);
            const double e = (c.outcome != 0 ? 1.0 : 0.0) - p;
            i_bb += a * a * w;
            i_aa += z * z * w - z * e;
            i_ab += a * e - a * z * w;
            info_theta[c.model] += a * a * w;
        }
        const double det = i_bb * i_aa - i_ab * i_ab;
        se_b[i] = (det > 0 && i_aa > 0) ? std::sqrt(i_aa / det) : std::sqrt(1.0 / i_bb);
    }
    for (std::size_t j = 0; j < M; ++j) se_theta[j] = std::sqrt(1.0 / info_theta[j]);
}

void validate_matrix_for_fit(const ResponseMatrix& matrix) { validate_fit_input(matrix); }
std::vector<bool> task_degenerate_flags(const ResponseMatrix& matrix) {
    return degenerate_flags(matrix);
}
void recenter_params(Irt2plParams& params, double* b_mean) { recenter(params, b_mean); }

} // namespace detail

IrtFit fit_map(const ResponseMatrix& matrix, const PriorConfig& priors, std::uint64_t seed,
               int max_iters, double tol) {
    priors.validate();
    validate_fit_input(matrix);
    if (max_iters < 1) throw ValidationError("fit_map: max_iters must be >= 1");
    if (!(tol > 0)) throw ValidationError("fit_map: tol must be > 0");

    const std::size_t T = matrix.n_tasks(), M = matrix.n_models();
    const std::size_t n = packed_size(matrix);
    const std::size_t v_slot = n - 1; // optimizer coordinate behind log sigma_b
    const double log_a_max = std::log(priors.a_max);
    const double log_scale_min = std::log(priors.b_scale_min);

    // optimizer space y == packed space x except for the scale coordinate,
    // where log sigma_b = log_scale_min + softplus(y[v])
    auto to_packed = [&](const std::vector<double>& y, std::vector<double>& x) {
        x = y;
        x[v_slot] = log_scale_min + softplus(y[v_slot]);
    };

    std::vector<double> y(n, 0.0), x(n), grad(n), y_new(n), x_new(n), grad_new(n);
    // start at a = 1, b = 0, theta = 0, mu_b = 0, sigma_b = 1
    {
        const double target = -log_scale_min; // softplus(v0) = -log(b_scale_min)
        y[v_slot] = std::log(std::expm1(target));
    }

    auto eval = [&](const std::vector<double>& yy, std::vector<double>& xx,
                    std::vector<double>* g) {
        to_packed(yy, xx);
        if (!g) return -log_posterior(matrix, priors, xx);
        const double lp = log_posterior_grad(matrix, priors, xx, *g);
        for (double& gi : *g) gi = -gi;
        (*g)[v_slot] *= sigmoid(yy[v_slot]); // chain rule through the softplus
        return -lp;
    };

    double f = eval(y, x, &grad);

    FitDiagnostics diag;
    diag.converged = false;
    diag.log_likelihood_trace.push_back(-f);

    constexpr int kHistory = 10;
    std::deque<std::vector<double>> s_hist, y_hist;
    std::deque<double> rho_hist;
    std::vector<double> d(n), q(n), alpha_buf(kHistory);

    int small_steps = 0;
    for (int iter = 0; iter < max_iters; ++iter) {
        // two-loop recursion for d = -H * grad
        q = grad;
        const int k = static_cast<int>(s_hist.size());
        for (int h = k - 1; h >= 0; --h) {
            const double a_h = rho_hist[h] * dot(s_hist[h], q);
            alpha_buf[h] = a_h;
            for (std::size_t i = 0; i < n; ++i) q[i] -= a_h * y_hist[h][i];
        }
        double scale = 1.0;
        if (k > 0) {
            const double yy = dot(y_hist[k - 1], y_hist[k - 1]);
            if (yy > 0) scale = dot(s_hist[k - 1], y_hist[k - 1]) / yy;
        }
        for (std::size_t i = 0; i < n; ++i) q[i] *= scale;
        for (int h = 0; h < k; ++h) {
            const double beta = rho_hist[h] * dot(y_hist[h], q);
            for (std::size_t i = 0; i < n; ++i) q[i] += s_hist[h][i] * (alpha_buf[h] - beta);
        }
        for (std::size_t i = 0; i < n; ++i) d[i] = -q[i];

        double gd = dot(grad, d);
        if (!(gd < 0)) { // not a descent direction; restart from steepest
            for (std::size_t i = 0; i < n; ++i) d[i] = -grad[i];
            gd = dot(grad, d);
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            if (!(gd < 0)) {
                diag.converged = true; // gradient numerically zero
                break;
            }
        }

        // Armijo backtracking; trial points keep the discrimination bound
        double t = 1.0, f_new = f;
        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt) {
            for (std::size_t i = 0; i < n; ++i) y_new[i] = y[i] + t * d[i];
            for (std::size_t i = 0; i < T; ++i) y_new[i] = std::min(y_new[i], log_a_max);
            // the softplus tail is flat below this; stop the asymptotic slide
            y_new[v_slot] = std::max(y_new[v_slot], -25.0);
            f_new = eval(y_new, x_new, nullptr);
            if (f_new <= f + 1e-4 * t * gd || (bt > 40 && f_new < f)) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) {
            diag.converged = true; // no ascent within line-search resolution
            break;
        }

        f_new = eval(y_new, x_new, &grad_new);

        std::vector<double> s_vec(n), yd_vec(n);
        for (std::size_t i = 0; i < n; ++i) {
            s_vec[i] = y_new[i] - y[i];
            yd_vec[i] = grad_new[i] - grad[i];
        }
        const double sy = dot(s_vec, yd_vec);
        if (sy > 1e-12) {
            s_hist.push_back(std::move(s_vec));
            y_hist.push_back(std::move(yd_vec));
            rho_hist.push_back(1.0 / sy);
            if (static_cast<int>(s_hist.size()) > kHistory) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }

        const double improvement = f - f_new;
        y.swap(y_new);
        grad.swap(grad_new);
        f = f_new;
        diag.log_likelihood_trace.push_back(-f);

        if (improvement <= tol * (1.0 + std::abs(f))) {
            if (++small_steps >= 2) {
                diag.converged = true;
                break;
            }
        } else {
            small_steps = 0;
        }
    }

    to_packed(y, x);
    diag.iterations = static_cast<int>(diag.log_likelihood_trace.size()) - 1;
    diag.final_objective = diag.log_likelihood_trace.back();

    IrtFit fit;
    fit.estimator = Estimator::map;
    fit.seed = seed;
    fit.params.task_ids = matrix.task_ids;
    fit.params.model_ids = matrix.model_ids;
    fit.params.a.resize(T);
    fit.params.b.resize(T);
    fit.params.theta.resize(M);
    for (std::size_t i = 0; i < T; ++i) {
        fit.params.a[i] = std::exp(x[i]);
        fit.params.b[i] = x[T + i];
    }
    for (std::size_t j = 0; j < M; ++j) fit.params.theta[j] = x[2 * T + j];
    diag.b_mean = x[2 * T + M];
    diag.b_scale = std::exp(x[2 * T + M + 1]);

    recenter(fit.params, &diag.b_mean);
    detail::curvature_standard_errors(matrix, priors, fit.params, fit.se_b, fit.se_theta,
                                      diag.b_scale);

    // clamp accounting at the returned point
    const double z_limit = -std::log(priors.prob_clamp / (1.0 - priors.prob_clamp));
    for (std::size_t i = 0; i < T; ++i)
        for (const Cell& c : matrix.task_row(i))
            if (std::abs(fit.params.a[i] * (fit.params.theta[c.model] - fit.params.b[i])) >
                z_limit)
                ++diag.clamp_events;

    fit.unreliable = degenerate_flags(matrix);
    fit.diagnostics = std::move(diag);
    return fit;
}

} // namespace irtime
