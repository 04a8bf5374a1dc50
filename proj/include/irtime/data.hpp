#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "irtime/dates.hpp"

namespace irtime {

// One model-task pair with raw repeated-trial counts.
struct RawOutcome {
    std::string model_id;
    std::string task_id;
    std::int64_t successes = 0;
    std::int64_t trials = 1;
};

struct Cell {
    std::int32_t task = 0;
    std::int32_t model = 0;
    std::uint8_t outcome = 0;
};

// Sparse binary model x task outcomes. Cells are sorted by (task, model),
// rows are addressable through offsets, and both id lists are sorted
// lexicographically by the builders, so layout is deterministic.
struct ResponseMatrix {
    std::vector<std::string> task_ids;
    std::vector<std::string> model_ids;
    std::vector<Cell> cells;
    std::vector<std::size_t> row_offsets; // size task_ids.size()+1

    std::size_t n_tasks() const { return task_ids.size(); }
    std::size_t n_models() const { return model_ids.size(); }
    double density() const;

    std::span<const Cell> task_row(std::size_t task) const {
        return {cells.data() + row_offsets[task], cells.data() + row_offsets[task + 1]};
    }

    // successes and observation count for one task row
    std::pair<std::int64_t, std::int64_t> task_counts(std::size_t task) const;
    bool task_all_fail(std::size_t task) const;
    bool task_all_pass(std::size_t task) const;

    int task_index(const std::string& id) const;
    int model_index(const std::string& id) const;

    // Validates invariants (dedup, non-empty rows/columns) and freezes the
    // sorted layout. Ids must already be sorted; cells may arrive unsorted.
    static ResponseMatrix build(std::vector<std::string> task_ids,
                                std::vector<std::string> model_ids,
                                std::vector<Cell> cells);
};

struct TaskRecord {
    std::string task_id;
    std::string benchmark;
    std::optional<double> human_minutes;
    std::optional<std::string> time_bucket;
    bool all_fail = false;
    bool all_pass = false;
};

struct ModelRecord {
    std::string model_id;
    Date release_date;
};

// outcome = 1 iff successes/trials >= 0.5; ties at exactly 50% count as
// success. Duplicate (model, task) pairs and successes > trials are rejected.
ResponseMatrix binarize(const std::vector<RawOutcome>& raw);

// One task per named indicator, task_id suffixed "::<name>", trials = 1.
std::vector<RawOutcome> expand_multi_criterion(
    const std::string& model_id, const std::string& task_id,
    const std::vector<std::pair<std::string, bool>>& indicators);

enum class DegeneratePolicy { keep, drop_all_fail, drop_all_fail_and_all_pass };

DegeneratePolicy parse_degenerate_policy(const std::string& name);

struct FilterResult {
    ResponseMatrix matrix;
    std::vector<std::string> excluded_tasks;
    std::vector<std::string> dropped_models; // lost their last observation
};

FilterResult filter_degenerate(const ResponseMatrix& matrix, DegeneratePolicy policy);

// Fills all_fail / all_pass on records whose task_id appears in the matrix.
void annotate_degenerate(const ResponseMatrix& matrix, std::vector<TaskRecord>& tasks);

} // namespace irtime
