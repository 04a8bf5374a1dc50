#pragma once

#include <string>
#include <vector>

#include "irtime/calibration.hpp"
#include "irtime/data.hpp"

namespace irtime {

// Success-rate heuristic scores on the logit scale, for comparison against
// the latent-trait fit. r and s are raw observed success rates; the logit
// scores are computed from Haldane-Anscombe smoothed rates so degenerate
// tasks and models stay finite.
struct BaselineScores {
    std::vector<std::string> task_ids;
    std::vector<std::string> model_ids;
    std::vector<double> r;      // per-task raw success rate
    std::vector<double> d_base; // per-task difficulty score, -logit(1 - r~)
    std::vector<double> s;      // per-model raw success rate
    std::vector<double> a_base; // per-model ability score, logit(s~)

    int task_index(const std::string& id) const;
};

double logit(double p);

// (successes + 0.5) / (observed + 1)
double smoothed_rate(std::int64_t successes, std::int64_t observed);

// The difficulty transform applied verbatim: -logit(1 - r). Algebraically
// equal to logit(r), so larger values mean easier tasks; the calibration
// slope absorbs the orientation.
double baseline_difficulty(double rate);

BaselineScores baseline_scores(const ResponseMatrix& matrix);

// Same OLS path as the latent calibration, regressing ln(minutes) on d_base
// over tasks with human time annotations.
TimeCalibration fit_baseline_calibration(const BaselineScores& scores,
                                         const std::vector<TaskRecord>& tasks);

} // namespace irtime
