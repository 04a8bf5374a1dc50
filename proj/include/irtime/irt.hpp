#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "irtime/data.hpp"

namespace irtime {

// Latent parameters of the two-parameter logistic model:
// P(success) = sigmoid(a_i * (theta_j - b_i)). b and theta live on one
// shared scale, identified by the constraint mean(theta) = 0.
struct Irt2plParams {
    std::vector<std::string> task_ids;
    std::vector<std::string> model_ids;
    std::vector<double> a;     // per-task discrimination, > 0
    std::vector<double> b;     // per-task difficulty
    std::vector<double> theta; // per-model ability

    int task_index(const std::string& id) const;
    int model_index(const std::string& id) const;
};

struct PriorConfig {
    double theta_sd = 1.0;          // theta ~ N(0, theta_sd)
    double b_mean_prior_sd = 2.0;   // mu_b ~ N(0, b_mean_prior_sd)
    double b_scale_prior_sd = 2.0;  // sigma_b ~ HalfNormal(b_scale_prior_sd)
    double a_log_sd = 0.5;          // a ~ LogNormal(0, a_log_sd)
    double a_max = 50.0;            // hard bound on a during fitting
    double prob_clamp = 1e-12;      // likelihood clamp on p
    // MAP-only lower bound on sigma_b: the joint mode of a hierarchical
    // scale is unbounded as sigma_b -> 0 (all b collapse onto mu_b), so the
    // optimizer must not chase it. MCMC samples the unbounded prior as is.
    double b_scale_min = 0.25;

    void validate() const;
};

struct FitDiagnostics {
    bool converged = true;
    std::uint64_t clamp_events = 0;

    // MAP: penalized log-posterior per accepted iteration (non-decreasing)
    std::vector<double> log_likelihood_trace;
    int iterations = 0;
    double final_objective = 0.0;

    // MCMC
    int chains = 0;
    int draws_per_chain = 0;
    int warmup = 0;
    double rhat_worst = 0.0;
    double effective_sample_size_min = 0.0;

    // fitted difficulty hyperparameters (point values)
    double b_mean = 0.0;
    double b_scale = 1.0;
};

enum class Estimator { map, mcmc };

std::string estimator_name(Estimator e);
Estimator parse_estimator(const std::string& name);

struct IrtFit {
    Irt2plParams params;
    std::vector<double> se_b;
    std::vector<double> se_theta;
    std::vector<bool> unreliable; // all-fail / all-pass tasks
    FitDiagnostics diagnostics;
    Estimator estimator = Estimator::map;
    std::uint64_t seed = 0;
};

// sigmoid(a * (theta - b)); overflow-safe. a = 0 is allowed for diagnostic
// evaluation and yields exactly 0.5.
double irf(double a, double b, double theta);

// log(p / (1 - p)) on (0,1); callers clamp boundary probabilities themselves.
double log_odds(double p);

double sigmoid(double x);

// log P(y | z) for a single binary outcome with logit z, computed in a
// softplus form that stays finite for any z.
double bernoulli_loglik(double z, bool success);

// Sum over observed cells only.
double log_likelihood(const ResponseMatrix& matrix, const Irt2plParams& params);

// --- packed log-posterior -------------------------------------------------
// Parameter vector layout used by the MAP optimizer and the gradient tests:
//   x = [log a (n_tasks), b (n_tasks), theta (n_models), mu_b, log sigma_b]
// The objective is the log density of the posterior in the natural
// (a, b, theta, mu_b, sigma_b) space evaluated at that point; positive
// parameters enter through log coordinates only to keep them positive.

std::size_t packed_size(const ResponseMatrix& matrix);

double log_posterior(const ResponseMatrix& matrix, const PriorConfig& priors,
                     std::span<const double> x);

// Objective and its analytic gradient with respect to the packed vector.
double log_posterior_grad(const ResponseMatrix& matrix, const PriorConfig& priors,
                          std::span<const double> x, std::span<double> grad);

IrtFit fit_map(const ResponseMatrix& matrix, const PriorConfig& priors, std::uint64_t seed,
               int max_iters = 1000, double tol = 1e-8);

// draws = total iterations per chain, of which the first `warmup` adapt the
// proposal scales and are discarded.
IrtFit fit_mcmc(const ResponseMatrix& matrix, const PriorConfig& priors, int chains,
                int draws, int warmup, std::uint64_t seed);

struct ProbMatrix {
    std::vector<std::string> task_ids;
    std::vector<std::string> model_ids;
    std::vector<double> p; // row-major, tasks x models

    double at(std::size_t task, std::size_t model) const {
        return p[task * model_ids.size() + model];
    }
};

ProbMatrix predict_matrix(const Irt2plParams& params,
                          std::span<const std::string> task_ids,
                          std::span<const std::string> model_ids);

} // namespace irtime
