#include <doctest.h>

#include <string>

#include "irtime/common.hpp"
#include "irtime/data.hpp"

using namespace irtime;

namespace {

RawOutcome ro(const std::string& m, const std::string& t, std::int64_t s, std::int64_t n) {
    return RawOutcome{m, t, s, n};
}

} // namespace

TEST_CASE("binarize applies the at-least-half rule") {
    const ResponseMatrix m = binarize({ro("m1", "t1", 3, 5),   // 0.6 -> 1
                                       ro("m1", "t2", 1, 2),   // boundary 0.5 -> 1
                                       ro("m1", "t3", 0, 4),   // -> 0
                                       ro("m2", "t1", 2, 5),   // 0.4 -> 0
                                       ro("m2", "t2", 0, 1),
                                       ro("m2", "t3", 1, 1)});
    auto outcome = [&](const char* task, const char* model) {
        const int ti = m.task_index(task), mj = m.model_index(model);
        for (const Cell& c : m.task_row(static_cast<std::size_t>(ti)))
            if (c.model == mj) return int(c.outcome);
        return -1;
    };
    CHECK(outcome("t1", "m1") == 1);
    CHECK(outcome("t2", "m1") == 1);
    CHECK(outcome("t3", "m1") == 0);
    CHECK(outcome("t1", "m2") == 0);
    CHECK(m.density() == doctest::Approx(1.0));
}

TEST_CASE("binarize orders ids lexicographically") {
    const ResponseMatrix m =
        binarize({ro("zeta", "b-task", 1, 1), ro("alpha", "a-task", 0, 1),
                  ro("zeta", "a-task", 1, 1), ro("alpha", "b-task", 0, 1)});
    CHECK(m.task_ids == std::vector<std::string>{"a-task", "b-task"});
    CHECK(m.model_ids == std::vector<std::string>{"alpha", "zeta"});
}

TEST_CASE("binarize rejects duplicates naming the pair") {
    try {
        binarize({ro("m1", "t1", 1, 1), ro("m1", "t1", 0, 1), ro("m2", "t1", 1, 1)});
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("m1") != std::string::npos);
        CHECK(msg.find("t1") != std::string::npos);
    }
}

TEST_CASE("binarize validates counts") {
    CHECK_THROWS_AS(binarize({ro("m", "t", 3, 2)}), ValidationError);
    CHECK_THROWS_AS(binarize({ro("m", "t", 0, 0)}), ValidationError);
    CHECK_THROWS_AS(binarize({ro("m", "t", -1, 2)}), ValidationError);
    CHECK_THROWS_AS(binarize({}), ValidationError);
}

TEST_CASE("binarize round-trips through its own binary output") {
    const ResponseMatrix m = binarize({ro("m1", "t1", 3, 5), ro("m1", "t2", 1, 2),
                                       ro("m2", "t1", 0, 3), ro("m2", "t2", 2, 2),
                                       ro("m3", "t1", 1, 4), ro("m3", "t2", 0, 1)});
    std::vector<RawOutcome> rebuilt;
    for (const Cell& c : m.cells)
        rebuilt.push_back(ro(m.model_ids[c.model], m.task_ids[c.task], c.outcome, 1));
    const ResponseMatrix again = binarize(rebuilt);
    CHECK(again.task_ids == m.task_ids);
    CHECK(again.model_ids == m.model_ids);
    REQUIRE(again.cells.size() == m.cells.size());
    for (std::size_t k = 0; k < m.cells.size(); ++k) {
        CHECK(again.cells[k].task == m.cells[k].task);
        CHECK(again.cells[k].model == m.cells[k].model);
        CHECK(again.cells[k].outcome == m.cells[k].outcome);
    }
}

TEST_CASE("expand_multi_criterion emits one task per indicator") {
    const auto out = expand_multi_criterion("agent-1", "comp-x",
                                            {{"valid", true}, {"median", true}, {"medal", false}});
    REQUIRE(out.size() == 3);
    CHECK(out[0].task_id == "comp-x::valid");
    CHECK(out[0].successes == 1);
    CHECK(out[1].task_id == "comp-x::median");
    CHECK(out[1].successes == 1);
    CHECK(out[2].task_id == "comp-x::medal");
    CHECK(out[2].successes == 0);
    for (const RawOutcome& r : out) {
        CHECK(r.trials == 1);
        CHECK(r.model_id == "agent-1");
    }
}

TEST_CASE("expand_multi_criterion degenerate and error cases") {
    const auto all_false = expand_multi_criterion(
        "m", "comp-y", {{"valid", false}, {"median", false}, {"medal", false}});
    CHECK(all_false.size() == 3);
    for (const RawOutcome& r : all_false) CHECK(r.successes == 0);

    const auto single = expand_multi_criterion("m", "comp-z", {{"valid", true}});
    REQUIRE(single.size() == 1);
    CHECK(single[0].task_id == "comp-z::valid");

    CHECK_THROWS_AS(expand_multi_criterion("m", "t", {}), ValidationError);
    CHECK_THROWS_AS(expand_multi_criterion("m", "t", {{"a", true}, {"a", false}}),
                    ValidationError);
}

namespace {

// 3 tasks x 3 models, dense; t-all-pass all ones, t-all-fail all zeros,
// t-mixed split
ResponseMatrix mixed_matrix() {
    std::vector<RawOutcome> raw;
    for (const char* model : {"m1", "m2", "m3"}) {
        raw.push_back(ro(model, "t-all-pass", 1, 1));
        raw.push_back(ro(model, "t-all-fail", 0, 1));
        raw.push_back(ro(model, "t-mixed", std::string(model) == "m1" ? 1 : 0, 1));
    }
    return binarize(raw);
}

} // namespace

TEST_CASE("filter_degenerate keep is the identity") {
    const ResponseMatrix m = mixed_matrix();
    const FilterResult r = filter_degenerate(m, DegeneratePolicy::keep);
    CHECK(r.matrix.task_ids == m.task_ids);
    CHECK(r.matrix.cells.size() == m.cells.size());
    CHECK(r.excluded_tasks.empty());
    CHECK(r.dropped_models.empty());
}

TEST_CASE("filter_degenerate drops all-fail tasks and reports them") {
    const FilterResult r = filter_degenerate(mixed_matrix(), DegeneratePolicy::drop_all_fail);
    CHECK(r.excluded_tasks == std::vector<std::string>{"t-all-fail"});
    CHECK(r.matrix.task_ids == std::vector<std::string>{"t-all-pass", "t-mixed"});
    CHECK(r.matrix.model_ids.size() == 3);
}

TEST_CASE("filter_degenerate drop_all_fail_and_all_pass on a full 3x3") {
    // row sums: all-pass 3, all-fail 0, mixed 1 -> two tasks dropped
    const FilterResult r =
        filter_degenerate(mixed_matrix(), DegeneratePolicy::drop_all_fail_and_all_pass);
    CHECK(r.matrix.task_ids == std::vector<std::string>{"t-mixed"});
    CHECK(r.excluded_tasks.size() == 2);
}

TEST_CASE("filter_degenerate never removes mixed tasks") {
    const ResponseMatrix m = binarize({ro("m1", "t1", 1, 1), ro("m2", "t1", 0, 1),
                                       ro("m1", "t2", 0, 1), ro("m2", "t2", 1, 1)});
    for (const auto policy : {DegeneratePolicy::drop_all_fail,
                              DegeneratePolicy::drop_all_fail_and_all_pass}) {
        const FilterResult r = filter_degenerate(m, policy);
        CHECK(r.matrix.task_ids.size() == 2);
        CHECK(r.excluded_tasks.empty());
    }
}

TEST_CASE("filter_degenerate errors when every task would go") {
    const ResponseMatrix m =
        binarize({ro("m1", "t1", 1, 1), ro("m2", "t1", 1, 1), ro("m1", "t2", 0, 1),
                  ro("m2", "t2", 0, 1)});
    CHECK_THROWS_AS(filter_degenerate(m, DegeneratePolicy::drop_all_fail_and_all_pass),
                    ValidationError);
}

TEST_CASE("filter_degenerate drops models that lose every observation") {
    // m-only observes just the all-fail task
    const ResponseMatrix m = binarize({ro("m1", "t-fail", 0, 1), ro("m2", "t-fail", 0, 1),
                                       ro("m-only", "t-fail", 0, 1), ro("m1", "t-ok", 1, 1),
                                       ro("m2", "t-ok", 0, 1)});
    const FilterResult r = filter_degenerate(m, DegeneratePolicy::drop_all_fail);
    CHECK(r.excluded_tasks == std::vector<std::string>{"t-fail"});
    CHECK(r.dropped_models == std::vector<std::string>{"m-only"});
    CHECK(r.matrix.model_ids == std::vector<std::string>{"m1", "m2"});
}

TEST_CASE("annotate_degenerate fills the task flags") {
    const ResponseMatrix m = mixed_matrix();
    std::vector<TaskRecord> tasks(4);
    tasks[0].task_id = "t-all-pass";
    tasks[1].task_id = "t-all-fail";
    tasks[2].task_id = "t-mixed";
    tasks[3].task_id = "t-unknown";
    annotate_degenerate(m, tasks);
    CHECK(tasks[0].all_pass);
    CHECK_FALSE(tasks[0].all_fail);
    CHECK(tasks[1].all_fail);
    CHECK_FALSE(tasks[1].all_pass);
    CHECK_FALSE(tasks[2].all_fail);
    CHECK_FALSE(tasks[2].all_pass);
    CHECK_FALSE(tasks[3].all_fail);
}

TEST_CASE("density reports the observed fraction") {
    const ResponseMatrix m = binarize({ro("m1", "t1", 1, 1), ro("m2", "t2", 0, 1),
                                       ro("m1", "t2", 1, 1)});
    CHECK(m.density() == doctest::Approx(0.75));
}
