#include "irtime/data.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "irtime/common.hpp"

namespace irtime {

double ResponseMatrix::density() const {
    if (task_ids.empty() || model_ids.empty()) return 0.0;
    return static_cast<double>(cells.size()) /
           (static_cast<double>(task_ids.size()) * static_cast<double>(model_ids.size()));
}

std::pair<std::int64_t, std::int64_t> ResponseMatrix::task_counts(std::size_t task) const {
    std::int64_t succ = 0, n = 0;
    for (const Cell& c : task_row(task)) {
        succ += c.outcome;
        ++n;
    }
    return {succ, n};
}

bool ResponseMatrix::task_all_fail(std::size_t task) const {
    auto [succ, n] = task_counts(task);
    return n > 0 && succ == 0;
}

bool ResponseMatrix::task_all_pass(std::size_t task) const {
    auto [succ, n] = task_counts(task);
    return n > 0 && succ == n;
}

namespace {

int sorted_index(const std::vector<std::string>& ids, const std::string& id) {
    auto it = std::lower_bound(ids.begin(), ids.end(), id);
    if (it == ids.end() || *it != id) return -1;
    return static_cast<int>(it - ids.begin());
}

} // namespace

int ResponseMatrix::task_index(const std::string& id) const {
    return sorted_index(task_ids, id);
}

int ResponseMatrix::model_index(const std::string& id) const {
    return sorted_index(model_ids, id);
}

ResponseMatrix ResponseMatrix::build(std::vector<std::string> task_ids,
                                     std::vector<std::string> model_ids,
                                     std::vector<Cell> cells) {
    ResponseMatrix m;
    m.task_ids = std::move(task_ids);
    m.model_ids = std::move(model_ids);
    m.cells = std::move(cells);

    std::sort(m.cells.begin(), m.cells.end(), [](const Cell& x, const Cell& y) {
        return x.task != y.task ? x.task < y.task : x.model < y.model;
    });
    for (std::size_t i = 1; i < m.cells.size(); ++i) {
        if (m.cells[i].task == m.cells[i - 1].task && m.cells[i].model == m.cells[i - 1].model)
            throw ValidationError("duplicate cell for (model='" +
                                  m.model_ids[m.cells[i].model] + "', task='" +
                                  m.task_ids[m.cells[i].task] + "')");
    }

    m.row_offsets.assign(m.task_ids.size() + 1, 0);
    std::vector<std::int64_t> col_counts(m.model_ids.size(), 0);
    for (const Cell& c : m.cells) {
        if (c.task < 0 || static_cast<std::size_t>(c.task) >= m.task_ids.size() ||
            c.model < 0 || static_cast<std::size_t>(c.model) >= m.model_ids.size())
            throw ValidationError("cell index out of range");
        ++m.row_offsets[static_cast<std::size_t>(c.task) + 1];
        ++col_counts[static_cast<std::size_t>(c.model)];
    }
    for (std::size_t i = 1; i < m.row_offsets.size(); ++i)
        m.row_offsets[i] += m.row_offsets[i - 1];

    for (std::size_t i = 0; i < m.task_ids.size(); ++i)
        if (m.row_offsets[i + 1] == m.row_offsets[i])
            throw ValidationError("task '" + m.task_ids[i] + "' has no observed cells");
    for (std::size_t j = 0; j < m.model_ids.size(); ++j)
        if (col_counts[j] == 0)
            throw ValidationError("model '" + m.model_ids[j] + "' has no observed cells");

    return m;
}

ResponseMatrix binarize(const std::vector<RawOutcome>& raw) {
    if (raw.empty()) throw ValidationError("binarize: no outcomes given");

    std::set<std::string> tasks, models;
    std::set<std::pair<std::string, std::string>> seen;
    for (const RawOutcome& r : raw) {
        if (r.trials < 1)
            throw ValidationError("outcome for (model='" + r.model_id + "', task='" +
                                  r.task_id + "'): trials must be >= 1");
        if (r.successes < 0 || r.successes > r.trials)
            throw ValidationError("outcome for (model='" + r.model_id + "', task='" +
                                  r.task_id + "'): successes " + std::to_string(r.successes) +
                                  " out of range for trials " + std::to_string(r.trials));
        if (!seen.emplace(r.model_id, r.task_id).second)
            throw ValidationError("duplicate outcome for (model='" + r.model_id +
                                  "', task='" + r.task_id + "')");
        tasks.insert(r.task_id);
        models.insert(r.model_id);
    }

    std::vector<std::string> task_ids(tasks.begin(), tasks.end());
    std::vector<std::string> model_ids(models.begin(), models.end());

    std::vector<Cell> cells;
    cells.reserve(raw.size());
    for (const RawOutcome& r : raw) {
        Cell c;
        c.task = sorted_index(task_ids, r.task_id);
        c.model = sorted_index(model_ids, r.model_id);
        c.outcome = (2 * r.successes >= r.trials) ? 1 : 0;
        cells.push_back(c);
    }
    return ResponseMatrix::build(std::move(task_ids), std::move(model_ids), std::move(cells));
}

std::vector<RawOutcome> expand_multi_criterion(
    const std::string& model_id, const std::string& task_id,
    const std::vector<std::pair<std::string, bool>>& indicators) {
    if (indicators.empty())
        throw ValidationError("expand_multi_criterion: empty indicator list for task '" +
                              task_id + "'");
    std::set<std::string> names;
    std::vector<RawOutcome> out;
    out.reserve(indicators.size());
    for (const auto& [name, value] : indicators) {
        if (!names.insert(name).second)
            throw ValidationError("expand_multi_criterion: duplicate indicator '" + name +
                                  "' for task '" + task_id + "'");
        out.push_back(RawOutcome{model_id, task_id + "::" + name, value ? 1 : 0, 1});
    }
    return out;
}

DegeneratePolicy parse_degenerate_policy(const std::string& name) {
    if (name == "keep") return DegeneratePolicy::keep;
    if (name == "drop_all_fail") return DegeneratePolicy::drop_all_fail;
    if (name == "drop_all_fail_and_all_pass") return DegeneratePolicy::drop_all_fail_and_all_pass;
    throw ValidationError("unknown degenerate-task policy '" + name + "'");
}

FilterResult filter_degenerate(const ResponseMatrix& matrix, DegeneratePolicy policy) {
    FilterResult result;
    if (policy == DegeneratePolicy::keep) {
        result.matrix = matrix;
        return result;
    }

    std::vector<bool> keep_task(matrix.n_tasks(), true);
    for (std::size_t i = 0; i < matrix.n_tasks(); ++i) {
        bool drop = matrix.task_all_fail(i);
        if (policy == DegeneratePolicy::drop_all_fail_and_all_pass)
            drop = drop || matrix.task_all_pass(i);
        if (drop) {
            keep_task[i] = false;
            result.excluded_tasks.push_back(matrix.task_ids[i]);
        }
    }

    std::vector<std::int64_t> col_counts(matrix.n_models(), 0);
    for (const Cell& c : matrix.cells)
        if (keep_task[static_cast<std::size_t>(c.task)])
            ++col_counts[static_cast<std::size_t>(c.model)];

    std::vector<std::string> task_ids, model_ids;
    std::vector<int> task_map(matrix.n_tasks(), -1), model_map(matrix.n_models(), -1);
    for (std::size_t i = 0; i < matrix.n_tasks(); ++i)
        if (keep_task[i]) {
            task_map[i] = static_cast<int>(task_ids.size());
            task_ids.push_back(matrix.task_ids[i]);
        }
    for (std::size_t j = 0; j < matrix.n_models(); ++j) {
        if (col_counts[j] > 0) {
            model_map[j] = static_cast<int>(model_ids.size());
            model_ids.push_back(matrix.model_ids[j]);
        } else {
            result.dropped_models.push_back(matrix.model_ids[j]);
        }
    }

    if (task_ids.empty())
        throw ValidationError("degenerate-task filter removed every task");

    std::vector<Cell> cells;
    cells.reserve(matrix.cells.size());
    for (const Cell& c : matrix.cells) {
        int ti = task_map[static_cast<std::size_t>(c.task)];
        int mj = model_map[static_cast<std::size_t>(c.model)];
        if (ti >= 0 && mj >= 0)
            cells.push_back(Cell{ti, mj, c.outcome});
    }
    result.matrix =
        ResponseMatrix::build(std::move(task_ids), std::move(model_ids), std::move(cells));
    return result;
}

void annotate_degenerate(const ResponseMatrix& matrix, std::vector<TaskRecord>& tasks) {
    for (TaskRecord& t : tasks) {
        int i = matrix.task_index(t.task_id);
        if (i < 0) continue;
        t.all_fail = matrix.task_all_fail(static_cast<std::size_t>(i));
        t.all_pass = matrix.task_all_pass(static_cast<std::size_t>(i));
    }
}

} // namespace irtime
