#include <doctest.h>

#include <cmath>

#include "irtime/common.hpp"
#include "irtime/irt.hpp"
#include "irtime/synth.hpp"

using namespace irtime;

TEST_CASE("generate is bit-deterministic given the spec") {
    SynthSpec spec;
    spec.n_tasks = 30;
    spec.n_models = 10;
    spec.missing_fraction = 0.3;
    spec.seed = 777;
    const SynthData d1 = generate(spec);
    const SynthData d2 = generate(spec);
    CHECK(d1.matrix.cells.size() == d2.matrix.cells.size());
    for (std::size_t k = 0; k < d1.matrix.cells.size(); ++k) {
        CHECK(d1.matrix.cells[k].task == d2.matrix.cells[k].task);
        CHECK(d1.matrix.cells[k].outcome == d2.matrix.cells[k].outcome);
    }
    for (std::size_t i = 0; i < d1.truth.b.size(); ++i) {
        CHECK(d1.truth.a[i] == d2.truth.a[i]);
        CHECK(d1.truth.b[i] == d2.truth.b[i]);
        CHECK(*d1.tasks[i].human_minutes == *d2.tasks[i].human_minutes);
    }
    for (std::size_t j = 0; j < d1.truth.theta.size(); ++j)
        CHECK(d1.truth.theta[j] == d2.truth.theta[j]);

    SynthSpec other = spec;
    other.seed = 778;
    const SynthData d3 = generate(other);
    bool any_diff = false;
    for (std::size_t i = 0; i < d1.truth.b.size(); ++i)
        any_diff = any_diff || d1.truth.b[i] != d3.truth.b[i];
    CHECK(any_diff);
}

TEST_CASE("zero missing fraction gives a dense matrix") {
    SynthSpec spec;
    spec.n_tasks = 12;
    spec.n_models = 7;
    spec.missing_fraction = 0.0;
    spec.seed = 5;
    const SynthData data = generate(spec);
    CHECK(data.matrix.cells.size() == 12u * 7u);
    CHECK(data.density == doctest::Approx(1.0));
}

TEST_CASE("density lands near the target at the documented sparsity") {
    // 49% missing at 200x60: density within two points of 0.51
    SynthSpec spec;
    spec.seed = 99;
    const SynthData data = generate(spec);
    CHECK(spec.missing_fraction == doctest::Approx(0.49));
    CHECK(data.density > 0.49);
    CHECK(data.density < 0.53);
    // every row and column observed
    for (std::size_t i = 0; i < data.matrix.n_tasks(); ++i)
        CHECK(data.matrix.task_row(i).size() > 0);
}

TEST_CASE("outcomes at theta == b are fair coin flips") {
    SynthSpec spec;
    spec.n_tasks = 50;
    spec.n_models = 50;
    spec.missing_fraction = 0.0;
    spec.b_min = -1e-9;
    spec.b_max = 1e-9;
    spec.theta = ThetaStatic{1e-12};
    spec.seed = 31;
    const SynthData data = generate(spec);
    double mean = 0.0;
    for (const Cell& c : data.matrix.cells) mean += c.outcome;
    mean /= double(data.matrix.cells.size());
    // 3-sigma binomial bound around one half
    const double bound = 3.0 * 0.5 / std::sqrt(double(data.matrix.cells.size()));
    CHECK(std::abs(mean - 0.5) < bound);
}

TEST_CASE("empirical success rates converge to the response function") {
    SynthSpec spec;
    spec.n_tasks = 3;
    spec.n_models = 2000;
    spec.missing_fraction = 0.0;
    spec.b_min = 0.299999999;
    spec.b_max = 0.300000001;
    spec.a_log_sd = 1e-9;
    spec.theta = ThetaStatic{1e-12}; // all thetas ~ 0
    spec.seed = 17;
    const SynthData data = generate(spec);
    const double expected = irf(1.0, 0.3, 0.0);
    for (std::size_t i = 0; i < data.matrix.n_tasks(); ++i) {
        auto [succ, n] = data.matrix.task_counts(i);
        const double rate = double(succ) / double(n);
        CHECK(std::abs(rate - expected) < 3.0 * std::sqrt(expected * (1 - expected) / double(n)));
    }
}

TEST_CASE("planted minutes follow the log-linear law") {
    SynthSpec spec;
    spec.n_tasks = 40;
    spec.n_models = 8;
    spec.missing_fraction = 0.0;
    spec.cal_noise_sd = 0.0;
    spec.cal_slope = 0.7;
    spec.cal_intercept = 2.0;
    spec.seed = 23;
    const SynthData data = generate(spec);
    for (std::size_t i = 0; i < data.tasks.size(); ++i)
        CHECK(std::log(*data.tasks[i].human_minutes) ==
              doctest::Approx(0.7 * data.truth.b[i] + 2.0).epsilon(1e-12));
}

TEST_CASE("linear theta schedule rises with release date") {
    SynthSpec spec;
    spec.n_models = 30;
    spec.n_tasks = 10;
    spec.missing_fraction = 0.0;
    spec.theta = ThetaLinear{Date{2023, 1, 1}, Date{2024, 1, 1}, 0.01, 0.0};
    spec.seed = 3;
    const SynthData data = generate(spec);
    for (std::size_t j = 1; j < data.truth.theta.size(); ++j) {
        CHECK(data.truth.theta[j] > data.truth.theta[j - 1]);
        CHECK(data.models[j].release_date > data.models[j - 1].release_date);
    }
    // slope per day matches the schedule
    const double dt = double(days_since_epoch(data.models.back().release_date) -
                             days_since_epoch(data.models.front().release_date));
    CHECK((data.truth.theta.back() - data.truth.theta.front()) / dt ==
          doctest::Approx(0.01).epsilon(1e-9));
}

TEST_CASE("impossible coverage fails after bounded retries") {
    SynthSpec spec;
    spec.n_tasks = 50;
    spec.n_models = 50;
    spec.missing_fraction = 0.9999;
    spec.seed = 1;
    CHECK_THROWS_AS(generate(spec), ValidationError);
}

TEST_CASE("spec validation") {
    SynthSpec spec;
    spec.missing_fraction = 1.0;
    CHECK_THROWS_AS(generate(spec), ValidationError);
    spec = SynthSpec{};
    spec.b_min = 2.0;
    spec.b_max = -2.0;
    CHECK_THROWS_AS(generate(spec), ValidationError);
    spec = SynthSpec{};
    spec.n_tasks = 0;
    CHECK_THROWS_AS(generate(spec), ValidationError);
}

TEST_CASE("oracle_b_grid finds the separating difficulty") {
    // task solved exactly by models with theta > 1, dense design
    std::vector<RawOutcome> raw;
    std::vector<double> theta;
    for (int j = 0; j < 21; ++j) {
        const double th = -2.0 + 0.2 * j;
        const std::string m = "m" + std::string(1, char('a' + j));
        raw.push_back(RawOutcome{m, "t-sep", th > 1.0, 1});
        raw.push_back(RawOutcome{m, "t-anchor", th > 0.0, 1});
        theta.push_back(th);
    }
    const ResponseMatrix matrix = binarize(raw);
    std::vector<double> grid;
    for (double b = -3.0; b <= 3.0; b += 0.05) grid.push_back(b);

    const double b_star = oracle_b_grid(matrix, 2.0, theta, "t-sep", grid);
    CHECK(b_star > 0.8);
    CHECK(b_star < 1.3);

    // symmetric split around the theta median lands at the median
    const double b_anchor = oracle_b_grid(matrix, 2.0, theta, "t-anchor", grid);
    CHECK(std::abs(b_anchor - 0.1) <= 0.1 + 1e-12); // median break between 0.0 and 0.2
}

TEST_CASE("oracle_b_grid pushes all-pass tasks to the grid boundary") {
    std::vector<RawOutcome> raw;
    std::vector<double> theta;
    for (int j = 0; j < 9; ++j) {
        const std::string m = "m" + std::to_string(j);
        raw.push_back(RawOutcome{m, "t-free", 1, 1});
        raw.push_back(RawOutcome{m, "t-mixed", j % 2 == 0, 1});
        theta.push_back(-1.0 + 0.25 * j);
    }
    const ResponseMatrix matrix = binarize(raw);
    std::vector<double> grid;
    for (double b = -4.0; b <= 4.0; b += 0.1) grid.push_back(b);
    CHECK(oracle_b_grid(matrix, 1.5, theta, "t-free", grid) == doctest::Approx(-4.0));
}

TEST_CASE("oracle_b_grid validates inputs") {
    std::vector<RawOutcome> raw{{"m1", "t1", 1, 1}, {"m2", "t1", 0, 1}};
    const ResponseMatrix matrix = binarize(raw);
    const std::vector<double> theta{0.0, 0.0};
    const std::vector<double> grid{0.0};
    CHECK_THROWS_AS(oracle_b_grid(matrix, 1.0, theta, "ghost", grid), ValidationError);
    const std::vector<double> short_theta{0.0};
    CHECK_THROWS_AS(oracle_b_grid(matrix, 1.0, short_theta, "t1", grid), ValidationError);
    CHECK_THROWS_AS(oracle_b_grid(matrix, 1.0, theta, "t1", {}), ValidationError);
}
