#include "irtime/baseline.hpp"

#include <algorithm>
#include <cmath>

#include "irtime/common.hpp"

namespace irtime {

int BaselineScores::task_index(const std::string& id) const {
    auto it = std::lower_bound(task_ids.begin(), task_ids.end(), id);
    if (it == task_ids.end() || *it != id) return -1;
    return static_cast<int>(it - task_ids.begin());
}

double logit(double p) {
    if (!(p > 0) || !(p < 1))
        throw ValidationError("logit: p must lie strictly inside (0, 1)");
    return std::log(p / (1.0 - p));
}

double smoothed_rate(std::int64_t successes, std::int64_t observed) {
    return (static_cast<double>(successes) + 0.5) / (static_cast<double>(observed) + 1.0);
}

double baseline_difficulty(double rate) { return -logit(1.0 - rate); }

BaselineScores baseline_scores(const ResponseMatrix& matrix) {
    const std::size_t T = matrix.n_tasks(), M = matrix.n_models();
    BaselineScores out;
    out.task_ids = matrix.task_ids;
    out.model_ids = matrix.model_ids;
    out.r.resize(T);
    out.d_base.resize(T);
    out.s.resize(M);
    out.a_base.resize(M);

    std::vector<std::int64_t> model_succ(M, 0), model_obs(M, 0);
    for (std::size_t i = 0; i < T; ++i) {
        auto [succ, n] = matrix.task_counts(i);
        out.r[i] = static_cast<double>(succ) / static_cast<double>(n);
        out.d_base[i] = baseline_difficulty(smoothed_rate(succ, n));
    }
    for (const Cell& c : matrix.cells) {
        model_succ[c.model] += c.outcome;
        ++model_obs[c.model];
    }
    for (std::size_t j = 0; j < M; ++j) {
        out.s[j] = static_cast<double>(model_succ[j]) / static_cast<double>(model_obs[j]);
        out.a_base[j] = logit(smoothed_rate(model_succ[j], model_obs[j]));
    }
    return out;
}

TimeCalibration fit_baseline_calibration(const BaselineScores& scores,
                                         const std::vector<TaskRecord>& tasks) {
    std::vector<std::pair<double, double>> pairs;
    for (const TaskRecord& t : tasks) {
        if (!t.human_minutes) continue;
        int i = scores.task_index(t.task_id);
        if (i < 0) continue;
        pairs.emplace_back(scores.d_base[static_cast<std::size_t>(i)], *t.human_minutes);
    }
    return fit_calibration(pairs);
}

} // namespace irtime
