#include "irtime/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "irtime/common.hpp"
#include "irtime/rng.hpp"

namespace irtime {

void SynthSpec::validate() const {
    if (n_tasks < 1 || n_models < 1)
        throw ValidationError("synth: need at least 1 task and 1 model");
    if (!(missing_fraction >= 0) || !(missing_fraction < 1))
        throw ValidationError("synth: missing fraction must lie in [0, 1)");
    if (!(a_log_sd > 0) || !(cal_noise_sd >= 0))
        throw ValidationError("synth: scale parameters must be positive");
    if (!(b_min < b_max)) throw ValidationError("synth: difficulty range is empty");
    if (const auto* lin = std::get_if<ThetaLinear>(&theta)) {
        if (!(lin->start < lin->end)) throw ValidationError("synth: date range is empty");
        if (!(lin->noise_sd >= 0)) throw ValidationError("synth: theta noise must be >= 0");
    } else {
        if (!(std::get<ThetaStatic>(theta).sd > 0))
            throw ValidationError("synth: theta sd must be > 0");
    }
}

namespace {

std::string padded_id(const char* prefix, int index, int width) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%0*d", prefix, width, index);
    return buf;
}

} // namespace

SynthData generate(const SynthSpec& spec) {
    spec.validate();
    const std::size_t T = static_cast<std::size_t>(spec.n_tasks);
    const std::size_t M = static_cast<std::size_t>(spec.n_models);

    SynthData out;
    out.truth.task_ids.reserve(T);
    out.truth.model_ids.reserve(M);
    const int tw = spec.n_tasks >= 1000 ? 5 : 4;
    const int mw = 3;
    for (int i = 0; i < spec.n_tasks; ++i)
        out.truth.task_ids.push_back(padded_id("task-", i, tw));
    for (int j = 0; j < spec.n_models; ++j)
        out.truth.model_ids.push_back(padded_id("model-", j, mw));

    // parameter draws, one derived stream per concern
    Rng par_rng = Rng::derive(spec.seed, 1);
    out.truth.a.resize(T);
    out.truth.b.resize(T);
    out.truth.theta.resize(M);
    for (std::size_t i = 0; i < T; ++i)
        out.truth.a[i] = std::exp(spec.a_log_mean + spec.a_log_sd * par_rng.normal());
    for (std::size_t i = 0; i < T; ++i)
        out.truth.b[i] = spec.b_min + (spec.b_max - spec.b_min) * par_rng.uniform();

    std::vector<Date> release(M);
    if (const auto* lin = std::get_if<ThetaLinear>(&spec.theta)) {
        const std::int64_t d0 = days_since_epoch(lin->start);
        const std::int64_t d1 = days_since_epoch(lin->end);
        double mean_day = 0.0;
        std::vector<double> day(M);
        for (std::size_t j = 0; j < M; ++j) {
            day[j] = M == 1 ? double(d0)
                            : double(d0) + double(d1 - d0) * double(j) / double(M - 1);
            release[j] = date_from_days(static_cast<std::int64_t>(day[j]));
            mean_day += day[j];
        }
        mean_day /= double(M);
        for (std::size_t j = 0; j < M; ++j)
            out.truth.theta[j] =
                lin->slope_per_day * (day[j] - mean_day) + lin->noise_sd * par_rng.normal();
    } else {
        const double sd = std::get<ThetaStatic>(spec.theta).sd;
        for (std::size_t j = 0; j < M; ++j) out.truth.theta[j] = sd * par_rng.normal();
        // evenly spaced dates so forecast commands run on static data too
        const Date start{2023, 1, 1};
        for (std::size_t j = 0; j < M; ++j)
            release[j] = date_from_days(days_since_epoch(start) +
                                        static_cast<std::int64_t>(14 * j));
    }

    // observation mask; redraw until every row and column is observed
    Rng mask_rng = Rng::derive(spec.seed, 2);
    std::vector<std::uint8_t> mask(T * M);
    bool ok = false;
    for (int attempt = 0; attempt < 100 && !ok; ++attempt) {
        std::vector<std::int64_t> row_n(T, 0), col_n(M, 0);
        for (std::size_t i = 0; i < T; ++i)
            for (std::size_t j = 0; j < M; ++j) {
                const bool observed = mask_rng.uniform() >= spec.missing_fraction;
                mask[i * M + j] = observed;
                row_n[i] += observed;
                col_n[j] += observed;
            }
        ok = std::all_of(row_n.begin(), row_n.end(), [](std::int64_t n) { return n > 0; }) &&
             std::all_of(col_n.begin(), col_n.end(), [](std::int64_t n) { return n > 0; });
    }
    if (!ok)
        throw ValidationError("synth: could not draw a mask covering every row and column "
                              "after 100 attempts; lower missing_fraction");

    Rng cell_rng = Rng::derive(spec.seed, 3);
    std::vector<Cell> cells;
    for (std::size_t i = 0; i < T; ++i)
        for (std::size_t j = 0; j < M; ++j) {
            if (!mask[i * M + j]) continue;
            const double p = irf(out.truth.a[i], out.truth.b[i], out.truth.theta[j]);
            cells.push_back(Cell{static_cast<std::int32_t>(i), static_cast<std::int32_t>(j),
                                 static_cast<std::uint8_t>(cell_rng.uniform() < p ? 1 : 0)});
        }

    out.matrix = ResponseMatrix::build(out.truth.task_ids, out.truth.model_ids,
                                       std::move(cells));
    out.density = out.matrix.density();

    // human minutes from the planted log-linear law
    Rng time_rng = Rng::derive(spec.seed, 4);
    out.tasks.reserve(T);
    for (std::size_t i = 0; i < T; ++i) {
        TaskRecord t;
        t.task_id = out.truth.task_ids[i];
        t.benchmark = "synth";
        t.human_minutes = std::exp(spec.cal_slope * out.truth.b[i] + spec.cal_intercept +
                                   spec.cal_noise_sd * time_rng.normal());
        out.tasks.push_back(std::move(t));
    }
    annotate_degenerate(out.matrix, out.tasks);

    out.models.reserve(M);
    for (std::size_t j = 0; j < M; ++j)
        out.models.push_back(ModelRecord{out.truth.model_ids[j], release[j]});

    out.truth_cal.slope = spec.cal_slope;
    out.truth_cal.intercept = spec.cal_intercept;
    out.truth_cal.n = spec.n_tasks;
    out.truth_cal.r_squared = 1.0;
    return out;
}

double oracle_b_grid(const ResponseMatrix& matrix, double a, std::span<const double> theta,
                     const std::string& task_id, std::span<const double> grid) {
    if (grid.empty()) throw ValidationError("oracle_b_grid: empty grid");
    if (theta.size() != matrix.n_models())
        throw ValidationError("oracle_b_grid: theta length does not match matrix");
    const int ti = matrix.task_index(task_id);
    if (ti < 0) throw ValidationError("oracle_b_grid: unknown task '" + task_id + "'");

    double best_b = grid.front();
    double best_ll = -std::numeric_limits<double>::infinity();
    for (double b : grid) {
        double ll = 0.0;
        for (const Cell& c : matrix.task_row(static_cast<std::size_t>(ti)))
            ll += bernoulli_loglik(a * (theta[c.model] - b), c.outcome != 0);
        if (ll > best_ll) {
            best_ll = ll;
            best_b = b;
        }
    }
    return best_b;
}

} // namespace irtime
