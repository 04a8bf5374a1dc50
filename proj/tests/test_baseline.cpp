#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "irtime/baseline.hpp"
#include "irtime/common.hpp"
#include "irtime/irt.hpp"
#include "irtime/rng.hpp"
#include "irtime/synth.hpp"

using namespace irtime;

TEST_CASE("minus logit of the failure rate equals logit of the success rate") {
    for (double r = 0.01; r < 1.0; r += 0.01)
        CHECK(std::abs(baseline_difficulty(r) - logit(r)) <= 1e-12);
    CHECK(baseline_difficulty(0.5) == doctest::Approx(0.0));
    CHECK(baseline_difficulty(0.75) == doctest::Approx(std::log(3.0)).epsilon(1e-14));
    CHECK(logit(0.9) == doctest::Approx(std::log(9.0)).epsilon(1e-14));
}

TEST_CASE("logit rejects boundary rates; smoothing keeps them away") {
    CHECK_THROWS_AS(logit(0.0), ValidationError);
    CHECK_THROWS_AS(logit(1.0), ValidationError);
    CHECK(smoothed_rate(0, 10) == doctest::Approx(0.5 / 11));
    CHECK(smoothed_rate(10, 10) == doctest::Approx(10.5 / 11));
    CHECK(smoothed_rate(1, 2) == doctest::Approx(0.5)); // symmetric case stays put
}

namespace {

ResponseMatrix simple_matrix() {
    std::vector<RawOutcome> raw;
    // t-hard: 0/3, t-even: 1/2 (m1 only observed pair missing), t-easy: 3/3
    for (const char* m : {"m1", "m2", "m3"}) {
        raw.push_back(RawOutcome{m, "t-hard", 0, 1});
        raw.push_back(RawOutcome{m, "t-easy", 1, 1});
    }
    raw.push_back(RawOutcome{"m1", "t-even", 1, 1});
    raw.push_back(RawOutcome{"m2", "t-even", 0, 1});
    return binarize(raw);
}

} // namespace

TEST_CASE("baseline_scores computes rates over observed cells only") {
    const BaselineScores s = baseline_scores(simple_matrix());
    const auto even = static_cast<std::size_t>(s.task_index("t-even"));
    CHECK(s.r[even] == doctest::Approx(0.5));
    CHECK(s.d_base[even] == doctest::Approx(0.0)); // smoothing fixed point at 1/2

    const auto hard = static_cast<std::size_t>(s.task_index("t-hard"));
    CHECK(s.r[hard] == 0.0);
    CHECK(std::isfinite(s.d_base[hard]));
    CHECK(s.d_base[hard] == doctest::Approx(-logit(1.0 - smoothed_rate(0, 3))).epsilon(1e-14));
}

TEST_CASE("every baseline score stays finite on degenerate rows and columns") {
    std::vector<RawOutcome> raw;
    for (int j = 0; j < 5; ++j) {
        const std::string m = "m" + std::to_string(j);
        raw.push_back(RawOutcome{m, "t-none", 0, 1});
        raw.push_back(RawOutcome{m, "t-all", 1, 1});
    }
    const BaselineScores s = baseline_scores(binarize(raw));
    for (double v : s.d_base) CHECK(std::isfinite(v));
    for (double v : s.a_base) CHECK(std::isfinite(v));
}

TEST_CASE("duplicating the model population leaves every task rate unchanged") {
    // task rates are means over models, so replicating every column is a
    // no-op; a duplicated model also scores identically to its original
    std::vector<RawOutcome> raw;
    Rng rng(3);
    for (int j = 0; j < 4; ++j)
        for (int t = 0; t < 6; ++t)
            raw.push_back(RawOutcome{"m" + std::to_string(j), "t" + std::to_string(t),
                                     rng.uniform() < 0.5, 1});
    const BaselineScores before = baseline_scores(binarize(raw));

    std::vector<RawOutcome> doubled = raw;
    for (const RawOutcome& r : raw)
        doubled.push_back(RawOutcome{r.model_id + "-copy", r.task_id, r.successes, 1});
    const BaselineScores after = baseline_scores(binarize(doubled));

    for (std::size_t i = 0; i < before.task_ids.size(); ++i) {
        const auto k = static_cast<std::size_t>(after.task_index(before.task_ids[i]));
        CHECK(after.r[k] == doctest::Approx(before.r[i]).epsilon(1e-15));
    }
    for (std::size_t j = 0; j < before.model_ids.size(); ++j) {
        std::size_t orig = 0, copy = 0;
        for (std::size_t k = 0; k < after.model_ids.size(); ++k) {
            if (after.model_ids[k] == before.model_ids[j]) orig = k;
            if (after.model_ids[k] == before.model_ids[j] + "-copy") copy = k;
        }
        CHECK(after.s[orig] == after.s[copy]);
        CHECK(after.a_base[orig] == after.a_base[copy]);
        CHECK(after.s[orig] == doctest::Approx(before.s[j]).epsilon(1e-15));
    }
}

TEST_CASE("model ability score is strictly increasing in the success rate") {
    std::vector<RawOutcome> raw;
    for (int j = 0; j < 5; ++j)
        for (int t = 0; t < 6; ++t)
            raw.push_back(
                RawOutcome{"m" + std::to_string(j), "t" + std::to_string(t), t < j + 1, 1});
    const BaselineScores s = baseline_scores(binarize(raw));
    for (std::size_t j = 1; j < s.model_ids.size(); ++j) {
        CHECK(s.s[j] > s.s[j - 1]);
        CHECK(s.a_base[j] > s.a_base[j - 1]);
    }
}

TEST_CASE("baseline calibration reuses the OLS path exactly") {
    // noiseless line in d_base reproduces slope and intercept
    std::vector<RawOutcome> raw;
    for (int j = 0; j < 8; ++j)
        for (int t = 0; t < 6; ++t)
            raw.push_back(
                RawOutcome{"m" + std::to_string(j), "t" + std::to_string(t), j > t, 1});
    const ResponseMatrix m = binarize(raw);
    const BaselineScores s = baseline_scores(m);

    std::vector<TaskRecord> tasks;
    std::vector<std::pair<double, double>> direct_pairs;
    for (std::size_t i = 0; i < s.task_ids.size(); ++i) {
        TaskRecord t;
        t.task_id = s.task_ids[i];
        t.human_minutes = std::exp(0.6 * s.d_base[i] + 1.2);
        tasks.push_back(t);
        direct_pairs.emplace_back(s.d_base[i], *t.human_minutes);
    }
    const TimeCalibration via_baseline = fit_baseline_calibration(s, tasks);
    const TimeCalibration direct = fit_calibration(direct_pairs);
    CHECK(via_baseline.slope == direct.slope);
    CHECK(via_baseline.intercept == direct.intercept);
    CHECK(via_baseline.slope == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(via_baseline.r_squared == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("constant baseline difficulty is a zero-variance error") {
    std::vector<RawOutcome> raw;
    for (int j = 0; j < 4; ++j)
        for (int t = 0; t < 3; ++t)
            raw.push_back(RawOutcome{"m" + std::to_string(j), "t" + std::to_string(t),
                                     j % 2 == 0, 1});
    const BaselineScores s = baseline_scores(binarize(raw));
    std::vector<TaskRecord> tasks;
    for (const std::string& id : s.task_ids) {
        TaskRecord t;
        t.task_id = id;
        t.human_minutes = 30.0;
        tasks.push_back(t);
    }
    CHECK_THROWS_AS(fit_baseline_calibration(s, tasks), ValidationError);
}

TEST_CASE("panel heterogeneity makes the baseline underpredict long tasks") {
    // Calibration tasks are observed by the whole model population; a newer
    // block of long tasks is evaluated only by the strongest models. The
    // success rate of a new task is then computed against a biased panel
    // and looks easy, while the latent difficulty lives on the shared
    // scale. The rate-based pipeline therefore maps long tasks to short
    // predicted times; the latent-trait pipeline does not.
    const double a = 1.8, cal_slope = 0.8153648132841944, cal_intercept = 3.0;
    const int n_models = 60;
    Rng rng(606);

    std::vector<double> theta(n_models);
    for (int j = 0; j < n_models; ++j)
        theta[j] = -2.5 + 5.0 * double(j) / double(n_models - 1);

    std::vector<RawOutcome> raw;
    std::vector<double> b_true;
    std::vector<std::string> cal_ids, new_ids;
    auto add_task = [&](const std::string& id, double b, double theta_min) {
        b_true.push_back(b);
        for (int j = 0; j < n_models; ++j) {
            if (theta[j] < theta_min) continue;
            char mid[16];
            std::snprintf(mid, sizeof mid, "m%02d", j);
            raw.push_back(RawOutcome{mid, id, rng.uniform() < irf(a, b, theta[j]), 1});
        }
    };
    for (int t = 0; t < 120; ++t) {
        char id[24];
        std::snprintf(id, sizeof id, "cal-%03d", t);
        cal_ids.push_back(id);
        add_task(id, -2.0 + 3.5 * rng.uniform(), -10.0); // everyone observed
    }
    for (int t = 0; t < 40; ++t) {
        char id[24];
        std::snprintf(id, sizeof id, "new-%03d", t);
        new_ids.push_back(id);
        add_task(id, 0.5 + 2.5 * rng.uniform(), 1.0); // strong panel only
    }

    const ResponseMatrix matrix =
        filter_degenerate(binarize(raw), DegeneratePolicy::drop_all_fail).matrix;
    const IrtFit fit = fit_map(matrix, PriorConfig{}, 4);
    const BaselineScores scores = baseline_scores(matrix);

    auto minutes_of = [&](std::size_t task_index) {
        return std::exp(cal_slope * b_true[task_index] + cal_intercept);
    };

    // both calibrations use only the fully observed block
    std::vector<std::pair<double, double>> irt_pairs, base_pairs;
    for (std::size_t t = 0; t < cal_ids.size(); ++t) {
        const int fi = fit.params.task_index(cal_ids[t]);
        if (fi < 0) continue;
        irt_pairs.emplace_back(fit.params.b[static_cast<std::size_t>(fi)], minutes_of(t));
        base_pairs.emplace_back(
            scores.d_base[static_cast<std::size_t>(scores.task_index(cal_ids[t]))],
            minutes_of(t));
    }
    const TimeCalibration irt_cal = fit_calibration(irt_pairs);
    const TimeCalibration base_cal = fit_calibration(base_pairs);

    double irt_log_err = 0.0, base_log_err = 0.0;
    std::size_t scored = 0;
    for (std::size_t t = 0; t < new_ids.size(); ++t) {
        const int fi = fit.params.task_index(new_ids[t]);
        if (fi < 0) continue;
        const double truth = minutes_of(cal_ids.size() + t);
        irt_log_err += std::log(
            predict_time(irt_cal, fit.params.b[static_cast<std::size_t>(fi)]) / truth);
        base_log_err += std::log(
            predict_time(base_cal,
                         scores.d_base[static_cast<std::size_t>(
                             scores.task_index(new_ids[t]))]) /
            truth);
        ++scored;
    }
    REQUIRE(scored > 30);
    irt_log_err /= double(scored);
    base_log_err /= double(scored);

    CHECK(base_log_err < -0.5);        // baseline maps long tasks far too short
    CHECK(irt_log_err > base_log_err);
    CHECK(std::abs(irt_log_err) < std::abs(base_log_err)); // latent route closer to truth
}
