#include "irtime/io.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>

#include <json.hpp>

#include "irtime/common.hpp"
#include "irtime/csv.hpp"
#include "irtime/json_writer.hpp"

namespace irtime::io {

namespace {

using nlohmann::json;

double parse_double(const std::string& s, const std::string& where) {
    const char* begin = s.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0' || !std::isfinite(v))
        throw ValidationError(where + ": cannot parse number '" + s + "'");
    return v;
}

std::int64_t parse_int(const std::string& s, const std::string& where) {
    const char* begin = s.c_str();
    char* end = nullptr;
    long long v = std::strtoll(begin, &end, 10);
    if (end == begin || *end != '\0')
        throw ValidationError(where + ": cannot parse integer '" + s + "'");
    return v;
}

std::string at_line(const CsvTable& t, std::size_t row) {
    return t.source + ":" + std::to_string(t.line_numbers[row]);
}

json parse_json_file(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ValidationError(path.string() + ": invalid JSON");
    return j;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

} // namespace

std::vector<RawOutcome> load_responses(const std::filesystem::path& path) {
    std::vector<RawOutcome> out;
    if (path.extension() == ".jsonl" || path.extension() == ".ndjson") {
        const std::string text = read_file(path);
        std::istringstream lines(text);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(lines, line)) {
            ++lineno;
            if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
            json j = json::parse(line, nullptr, false);
            const std::string where = path.string() + ":" + std::to_string(lineno);
            if (j.is_discarded() || !j.is_object())
                throw ValidationError(where + ": invalid JSON object");
            RawOutcome r;
            if (!j.contains("model_id") || !j.contains("task_id"))
                throw ValidationError(where + ": model_id and task_id are required");
            r.model_id = j["model_id"].get<std::string>();
            r.task_id = j["task_id"].get<std::string>();
            if (j.contains("outcome")) {
                const auto o = j["outcome"].get<std::int64_t>();
                if (o != 0 && o != 1)
                    throw ValidationError(where + ": outcome must be 0 or 1");
                r.successes = o;
                r.trials = 1;
            } else {
                if (!j.contains("successes") || !j.contains("trials"))
                    throw ValidationError(where +
                                          ": need outcome, or successes and trials");
                r.successes = j["successes"].get<std::int64_t>();
                r.trials = j["trials"].get<std::int64_t>();
            }
            out.push_back(std::move(r));
        }
        return out;
    }

    const CsvTable t = read_csv(path);
    const std::size_t model_c = t.require_column("model_id");
    const std::size_t task_c = t.require_column("task_id");
    const int outcome_c = t.column("outcome");
    if (outcome_c < 0) {
        const std::size_t succ_c = t.require_column("successes");
        const std::size_t trial_c = t.require_column("trials");
        for (std::size_t k = 0; k < t.rows.size(); ++k) {
            const auto& row = t.rows[k];
            out.push_back(RawOutcome{row[model_c], row[task_c],
                                     parse_int(row[succ_c], at_line(t, k)),
                                     parse_int(row[trial_c], at_line(t, k))});
        }
    } else {
        for (std::size_t k = 0; k < t.rows.size(); ++k) {
            const auto& row = t.rows[k];
            const std::int64_t o =
                parse_int(row[static_cast<std::size_t>(outcome_c)], at_line(t, k));
            if (o != 0 && o != 1)
                throw ValidationError(at_line(t, k) + ": outcome must be 0 or 1");
            out.push_back(RawOutcome{row[model_c], row[task_c], o, 1});
        }
    }
    return out;
}

std::vector<TaskRecord> load_tasks(const std::filesystem::path& path) {
    const CsvTable t = read_csv(path);
    const std::size_t id_c = t.require_column("task_id");
    const int bench_c = t.column("benchmark");
    const int minutes_c = t.column("human_minutes");
    const int bucket_c = t.column("time_bucket");

    std::vector<TaskRecord> out;
    out.reserve(t.rows.size());
    for (std::size_t k = 0; k < t.rows.size(); ++k) {
        const auto& row = t.rows[k];
        TaskRecord rec;
        rec.task_id = row[id_c];
        if (rec.task_id.empty())
            throw ValidationError(at_line(t, k) + ": empty task_id");
        if (bench_c >= 0) rec.benchmark = row[static_cast<std::size_t>(bench_c)];
        if (minutes_c >= 0 && !row[static_cast<std::size_t>(minutes_c)].empty()) {
            const double m =
                parse_double(row[static_cast<std::size_t>(minutes_c)], at_line(t, k));
            if (!(m > 0))
                throw ValidationError(at_line(t, k) + ": human_minutes must be positive");
            rec.human_minutes = m;
        }
        if (bucket_c >= 0 && !row[static_cast<std::size_t>(bucket_c)].empty())
            rec.time_bucket = row[static_cast<std::size_t>(bucket_c)];
        out.push_back(std::move(rec));
    }
    return out;
}

std::vector<ModelRecord> load_models(const std::filesystem::path& path) {
    const CsvTable t = read_csv(path);
    const std::size_t id_c = t.require_column("model_id");
    const std::size_t date_c = t.require_column("release_date");
    std::vector<ModelRecord> out;
    out.reserve(t.rows.size());
    for (std::size_t k = 0; k < t.rows.size(); ++k) {
        const auto& row = t.rows[k];
        if (row[id_c].empty()) throw ValidationError(at_line(t, k) + ": empty model_id");
        try {
            out.push_back(ModelRecord{row[id_c], parse_date(row[date_c])});
        } catch (const ValidationError& e) {
            throw ValidationError(at_line(t, k) + ": " + e.what());
        }
    }
    return out;
}

BucketScheme load_bucket_scheme(const std::string& path_or_preset) {
    if (path_or_preset == "swe-verified") return BucketScheme::swe_verified();
    const json j = parse_json_file(path_or_preset);
    if (!j.contains("labels") || !j.contains("upper_bounds_minutes"))
        throw ValidationError(path_or_preset +
                              ": bucket scheme needs labels and upper_bounds_minutes");
    BucketScheme scheme;
    for (const auto& l : j["labels"]) scheme.labels.push_back(l.get<std::string>());
    for (const auto& b : j["upper_bounds_minutes"])
        scheme.upper_bounds_minutes.push_back(b.get<double>());
    scheme.validate();
    return scheme;
}

std::string render_irt_fit(const IrtFit& fit, const PriorConfig& priors) {
    JsonWriter w;
    w.begin_object();
    w.field("estimator", estimator_name(fit.estimator));
    w.field("seed", fit.seed);
    w.key("priors").begin_object();
    w.field("theta_sd", priors.theta_sd);
    w.field("b_mean_prior_sd", priors.b_mean_prior_sd);
    w.field("b_scale_prior_sd", priors.b_scale_prior_sd);
    w.field("a_log_sd", priors.a_log_sd);
    w.field("a_max", priors.a_max);
    w.field("prob_clamp", priors.prob_clamp);
    w.end_object();

    w.key("tasks").begin_array();
    for (std::size_t i = 0; i < fit.params.task_ids.size(); ++i) {
        w.begin_object();
        w.field("task_id", fit.params.task_ids[i]);
        w.field("a", fit.params.a[i]);
        w.field("b", fit.params.b[i]);
        w.field("se_b", fit.se_b[i]);
        w.field("unreliable", static_cast<bool>(fit.unreliable[i]));
        w.end_object();
    }
    w.end_array();

    w.key("models").begin_array();
    for (std::size_t j = 0; j < fit.params.model_ids.size(); ++j) {
        w.begin_object();
        w.field("model_id", fit.params.model_ids[j]);
        w.field("theta", fit.params.theta[j]);
        w.field("se_theta", fit.se_theta[j]);
        w.end_object();
    }
    w.end_array();

    const FitDiagnostics& d = fit.diagnostics;
    w.key("diagnostics").begin_object();
    w.field("converged", d.converged);
    if (fit.estimator == Estimator::map) {
        w.field("iterations", d.iterations);
        w.field("final_objective", d.final_objective);
        w.field("clamp_events", d.clamp_events);
        w.field("b_mean", d.b_mean);
        w.field("b_scale", d.b_scale);
        w.key("log_likelihood_trace").begin_array();
        for (double v : d.log_likelihood_trace) w.value(v);
        w.end_array();
    } else {
        w.field("chains", d.chains);
        w.field("draws_per_chain", d.draws_per_chain);
        w.field("warmup", d.warmup);
        w.field("rhat_worst", d.rhat_worst);
        w.field("effective_sample_size_min", d.effective_sample_size_min);
        w.field("clamp_events", d.clamp_events);
        w.field("b_mean", d.b_mean);
        w.field("b_scale", d.b_scale);
    }
    w.end_object();
    w.end_object();
    return w.str() + "\n";
}

void write_irt_fit(const std::filesystem::path& path, const IrtFit& fit,
                   const PriorConfig& priors) {
    write_file(path, render_irt_fit(fit, priors));
}

IrtFit load_irt_fit(const std::filesystem::path& path) {
    const json j = parse_json_file(path);
    IrtFit fit;
    try {
        fit.estimator = parse_estimator(j.at("estimator").get<std::string>());
        fit.seed = j.at("seed").get<std::uint64_t>();
        for (const auto& t : j.at("tasks")) {
            fit.params.task_ids.push_back(t.at("task_id").get<std::string>());
            fit.params.a.push_back(t.at("a").get<double>());
            fit.params.b.push_back(t.at("b").get<double>());
            fit.se_b.push_back(t.at("se_b").get<double>());
            fit.unreliable.push_back(t.at("unreliable").get<bool>());
        }
        for (const auto& m : j.at("models")) {
            fit.params.model_ids.push_back(m.at("model_id").get<std::string>());
            fit.params.theta.push_back(m.at("theta").get<double>());
            fit.se_theta.push_back(m.at("se_theta").get<double>());
        }
        const auto& d = j.at("diagnostics");
        fit.diagnostics.converged = d.at("converged").get<bool>();
        if (d.contains("rhat_worst"))
            fit.diagnostics.rhat_worst = d["rhat_worst"].get<double>();
    } catch (const json::exception& e) {
        throw ValidationError(path.string() + ": malformed fit file: " + e.what());
    }
    // ids must arrive sorted; downstream lookups binary-search them
    for (std::size_t i = 1; i < fit.params.task_ids.size(); ++i)
        if (fit.params.task_ids[i] <= fit.params.task_ids[i - 1])
            throw ValidationError(path.string() + ": task ids are not sorted and unique");
    for (std::size_t j2 = 1; j2 < fit.params.model_ids.size(); ++j2)
        if (fit.params.model_ids[j2] <= fit.params.model_ids[j2 - 1])
            throw ValidationError(path.string() + ": model ids are not sorted and unique");
    return fit;
}

void write_calibration(const std::filesystem::path& path, const TimeCalibration& cal,
                       const std::string& source_fit_checksum) {
    JsonWriter w;
    w.begin_object();
    w.field("slope", cal.slope);
    w.field("intercept", cal.intercept);
    w.field("r_squared", cal.r_squared);
    w.field("n", cal.n);
    w.field("se_slope", cal.se_slope);
    w.field("se_intercept", cal.se_intercept);
    w.field("source_fit", source_fit_checksum);
    w.end_object();
    write_file(path, w.str() + "\n");
}

TimeCalibration load_calibration(const std::filesystem::path& path) {
    const json j = parse_json_file(path);
    TimeCalibration cal;
    try {
        cal.slope = j.at("slope").get<double>();
        cal.intercept = j.at("intercept").get<double>();
        cal.r_squared = j.at("r_squared").get<double>();
        cal.n = j.at("n").get<std::int64_t>();
        cal.se_slope = j.at("se_slope").get<double>();
        cal.se_intercept = j.at("se_intercept").get<double>();
    } catch (const json::exception& e) {
        throw ValidationError(path.string() + ": malformed calibration file: " + e.what());
    }
    return cal;
}

void write_baseline_scores(const std::filesystem::path& path, const BaselineScores& scores) {
    JsonWriter w;
    w.begin_object();
    w.key("tasks").begin_array();
    for (std::size_t i = 0; i < scores.task_ids.size(); ++i) {
        w.begin_object();
        w.field("task_id", scores.task_ids[i]);
        w.field("r", scores.r[i]);
        w.field("d_base", scores.d_base[i]);
        w.end_object();
    }
    w.end_array();
    w.key("models").begin_array();
    for (std::size_t j = 0; j < scores.model_ids.size(); ++j) {
        w.begin_object();
        w.field("model_id", scores.model_ids[j]);
        w.field("s", scores.s[j]);
        w.field("a_base", scores.a_base[j]);
        w.end_object();
    }
    w.end_array();
    w.end_object();
    write_file(path, w.str() + "\n");
}

void write_eval_report(const std::filesystem::path& path, const EvalReport& report,
                       bool classification_present, const BucketScheme* scheme) {
    JsonWriter w;
    w.begin_object();
    w.key("metadata").begin_object();
    w.field("kappa_weighting", "quadratic");
    w.field("f1_weighting", "support");
    w.field("tolerance_band_low", 0.5);
    w.field("tolerance_band_high", 2.0);
    if (scheme) {
        w.key("bucket_labels").begin_array();
        for (const std::string& l : scheme->labels) w.value(l);
        w.end_array();
    }
    w.end_object();

    w.key("per_bucket_accuracy").begin_object();
    for (const auto& [label, stat] : report.per_bucket_accuracy) {
        w.key(label).begin_object();
        w.field("accuracy", stat.accuracy);
        w.field("n", stat.n);
        w.end_object();
    }
    w.end_object();

    if (classification_present) {
        w.field("overall_accuracy", report.overall_accuracy);
        w.field("weighted_macro_f1", report.weighted_macro_f1);
        w.field("weighted_kappa", report.weighted_kappa);
    } else {
        w.key("overall_accuracy").null();
        w.key("weighted_macro_f1").null();
        w.key("weighted_kappa").null();
    }
    if (report.r_squared_loglog)
        w.field("r_squared_loglog", *report.r_squared_loglog);
    else
        w.key("r_squared_loglog").null();
    if (report.tolerance_band_coverage)
        w.field("tolerance_band_coverage", *report.tolerance_band_coverage);
    else
        w.key("tolerance_band_coverage").null();
    w.end_object();
    write_file(path, w.str() + "\n");
}

void write_forecast(const std::filesystem::path& path, const HorizonForecast& f) {
    JsonWriter w;
    w.begin_object();
    w.field("p_target", f.p_target);
    w.field("window_months", f.window_months);
    w.field("anchor", format_date(f.anchor));
    w.field("smoothing", f.smoothing);
    w.field("days_per_month", kDaysPerMonth);
    w.key("frontier").begin_array();
    for (const FrontierPoint& p : f.frontier) {
        w.begin_object();
        w.field("window_start", format_date(p.window_start));
        w.field("model_id", p.model_id);
        w.field("release_date", format_date(p.release_date));
        w.field("theta", p.theta);
        w.field("horizon_minutes", p.horizon_minutes);
        w.field("horizon_status", p.horizon_status);
        w.end_object();
    }
    w.end_array();
    w.field("slope_log2_minutes_per_day", f.trend.slope_log2_minutes_per_day);
    w.field("intercept_log2", f.trend.intercept_log2);
    if (f.trend.finite)
        w.field("doubling_months", f.trend.doubling_months);
    else
        w.key("doubling_months").null();
    w.field("doubling_finite", f.trend.finite);
    w.field("ci_low", f.ci.ci_low);
    w.field("ci_high", f.ci.ci_high);
    w.field("ci_inverted", f.ci.inverted);
    w.field("finite_resamples", f.ci.finite_resamples);
    w.field("bootstrap_iters", f.bootstrap_iters);
    w.field("seed", f.seed);
    w.end_object();
    write_file(path, w.str() + "\n");
}

void write_curve_csv(const std::filesystem::path& path, const SuccessCurve& curve) {
    std::string out = "h_minutes,p,p_low,p_high\n";
    for (const CurvePoint& cp : curve.points) {
        out += JsonWriter::format_double(cp.h) + "," + JsonWriter::format_double(cp.p) + "," +
               JsonWriter::format_double(cp.p_low) + "," +
               JsonWriter::format_double(cp.p_high) + "\n";
    }
    write_file(path, out);
}

void write_predictions_csv(const std::filesystem::path& path,
                           const std::vector<Prediction>& preds) {
    std::string out = "task_id,predicted_minutes,low_minutes,high_minutes,unreliable\n";
    for (const Prediction& p : preds) {
        out += csv_field(p.task_id) + "," + JsonWriter::format_double(p.minutes) + "," +
               JsonWriter::format_double(p.low) + "," + JsonWriter::format_double(p.high) +
               "," + (p.unreliable ? "1" : "0") + "\n";
    }
    write_file(path, out);
}

void write_predictions_json(const std::filesystem::path& path,
                            const std::vector<Prediction>& preds) {
    JsonWriter w;
    w.begin_object();
    w.key("predictions").begin_array();
    for (const Prediction& p : preds) {
        w.begin_object();
        w.field("task_id", p.task_id);
        w.field("predicted_minutes", p.minutes);
        w.field("low_minutes", p.low);
        w.field("high_minutes", p.high);
        w.field("unreliable", p.unreliable);
        w.end_object();
    }
    w.end_array();
    w.end_object();
    write_file(path, w.str() + "\n");
}

std::vector<Prediction> load_predictions(const std::filesystem::path& path) {
    std::vector<Prediction> out;
    if (path.extension() == ".json") {
        const json j = parse_json_file(path);
        for (const auto& p : j.at("predictions")) {
            Prediction pr;
            pr.task_id = p.at("task_id").get<std::string>();
            pr.minutes = p.at("predicted_minutes").get<double>();
            pr.low = p.value("low_minutes", pr.minutes);
            pr.high = p.value("high_minutes", pr.minutes);
            pr.unreliable = p.value("unreliable", false);
            out.push_back(std::move(pr));
        }
        return out;
    }
    const CsvTable t = read_csv(path);
    const std::size_t id_c = t.require_column("task_id");
    const std::size_t min_c = t.require_column("predicted_minutes");
    const int low_c = t.column("low_minutes");
    const int high_c = t.column("high_minutes");
    const int unrel_c = t.column("unreliable");
    for (std::size_t k = 0; k < t.rows.size(); ++k) {
        const auto& row = t.rows[k];
        Prediction pr;
        pr.task_id = row[id_c];
        pr.minutes = parse_double(row[min_c], at_line(t, k));
        pr.low = low_c >= 0 ? parse_double(row[std::size_t(low_c)], at_line(t, k)) : pr.minutes;
        pr.high =
            high_c >= 0 ? parse_double(row[std::size_t(high_c)], at_line(t, k)) : pr.minutes;
        pr.unreliable =
            unrel_c >= 0 && parse_int(row[std::size_t(unrel_c)], at_line(t, k)) != 0;
        out.push_back(std::move(pr));
    }
    return out;
}

void write_horizons_csv(const std::filesystem::path& path,
                        const std::vector<ModelHorizon>& horizons) {
    std::string out = "model_id,release_date,theta,p_target,horizon_minutes,horizon_status\n";
    for (const ModelHorizon& h : horizons) {
        out += csv_field(h.model_id) + "," + format_date(h.release_date) + "," +
               JsonWriter::format_double(h.theta) + "," +
               JsonWriter::format_double(h.p_target) + "," +
               JsonWriter::format_double(h.horizon_minutes) + "," + h.status + "\n";
    }
    write_file(path, out);
}

void write_horizons_json(const std::filesystem::path& path,
                         const std::vector<ModelHorizon>& horizons) {
    JsonWriter w;
    w.begin_object();
    w.key("horizons").begin_array();
    for (const ModelHorizon& h : horizons) {
        w.begin_object();
        w.field("model_id", h.model_id);
        w.field("release_date", format_date(h.release_date));
        w.field("theta", h.theta);
        w.field("p_target", h.p_target);
        w.field("horizon_minutes", h.horizon_minutes);
        w.field("horizon_status", h.status);
        w.end_object();
    }
    w.end_array();
    w.end_object();
    write_file(path, w.str() + "\n");
}

void write_synth_truth(const std::filesystem::path& path, const SynthData& data,
                       const SynthSpec& spec) {
    JsonWriter w;
    w.begin_object();
    w.field("seed", spec.seed);
    w.field("density", data.density);
    w.key("calibration").begin_object();
    w.field("slope", spec.cal_slope);
    w.field("intercept", spec.cal_intercept);
    w.field("noise_sd", spec.cal_noise_sd);
    w.end_object();
    w.key("tasks").begin_array();
    for (std::size_t i = 0; i < data.truth.task_ids.size(); ++i) {
        w.begin_object();
        w.field("task_id", data.truth.task_ids[i]);
        w.field("a", data.truth.a[i]);
        w.field("b", data.truth.b[i]);
        w.field("human_minutes", data.tasks[i].human_minutes.value_or(0.0));
        w.end_object();
    }
    w.end_array();
    w.key("models").begin_array();
    for (std::size_t j = 0; j < data.truth.model_ids.size(); ++j) {
        w.begin_object();
        w.field("model_id", data.truth.model_ids[j]);
        w.field("theta", data.truth.theta[j]);
        w.field("release_date", format_date(data.models[j].release_date));
        w.end_object();
    }
    w.end_array();
    w.end_object();
    write_file(path, w.str() + "\n");
}

void write_responses_csv(const std::filesystem::path& path, const ResponseMatrix& matrix) {
    std::string out = "model_id,task_id,outcome\n";
    for (const Cell& c : matrix.cells) {
        out += csv_field(matrix.model_ids[c.model]) + "," +
               csv_field(matrix.task_ids[c.task]) + "," + (c.outcome ? "1" : "0") + "\n";
    }
    write_file(path, out);
}

void write_tasks_csv(const std::filesystem::path& path,
                     const std::vector<TaskRecord>& tasks) {
    std::string out = "task_id,benchmark,human_minutes,time_bucket\n";
    for (const TaskRecord& t : tasks) {
        out += csv_field(t.task_id) + "," + csv_field(t.benchmark) + ",";
        if (t.human_minutes) out += JsonWriter::format_double(*t.human_minutes);
        out += ",";
        if (t.time_bucket) out += csv_field(*t.time_bucket);
        out += "\n";
    }
    write_file(path, out);
}

void write_models_csv(const std::filesystem::path& path,
                      const std::vector<ModelRecord>& models) {
    std::string out = "model_id,release_date\n";
    for (const ModelRecord& m : models)
        out += csv_field(m.model_id) + "," + format_date(m.release_date) + "\n";
    write_file(path, out);
}

std::string checksum_file(const std::filesystem::path& path) {
    return fnv1a64_hex(read_file(path));
}

std::string sanitize_filename(const std::string& id) {
    std::string out;
    out.reserve(id.size());
    for (char c : id) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.';
        out += ok ? c : '_';
    }
    return out.empty() ? "_" : out;
}

} // namespace irtime::io
