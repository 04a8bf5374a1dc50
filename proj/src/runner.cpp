#include "irtime/runner.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <set>

#include "irtime/common.hpp"
#include "irtime/csv.hpp"
#include "irtime/io.hpp"
#include "irtime/json_writer.hpp"

namespace irtime {

namespace {

namespace fs = std::filesystem;

constexpr const char* kArtifactVersion = "0.1.0";

struct Manifest {
    const RunConfig& config;
    JsonWriter w;
    std::vector<std::pair<std::string, std::string>> inputs;
    std::vector<std::string> outputs;

    explicit Manifest(const RunConfig& c) : config(c) {}

    void input(const fs::path& path) {
        if (path.empty()) return;
        inputs.emplace_back(path.string(), io::checksum_file(path));
    }
    void output(const std::string& name) { outputs.push_back(name); }

    void write(std::initializer_list<std::pair<std::string, std::string>> config_echo) {
        JsonWriter m;
        m.begin_object();
        m.field("command", config.command);
        m.field("artifact_version", kArtifactVersion);
        if (config.seed_set) m.field("seed", config.seed);
        m.key("config").begin_object();
        for (const auto& [k, v] : config_echo) m.field(k, v);
        m.end_object();
        m.key("inputs").begin_object();
        for (const auto& [path, checksum] : inputs) m.field(path, checksum);
        m.end_object();
        m.key("outputs").begin_array();
        for (const std::string& name : outputs) m.value(name);
        m.end_array();
        m.end_object();
        write_file(config.out_dir / "run_manifest.json", m.str() + "\n");
    }
};

std::string fmt(double v) { return JsonWriter::format_double(v); }
std::string fmt(int v) { return std::to_string(v); }

void require(bool cond, const std::string& message) {
    if (!cond) throw ValidationError(message);
}

void require_seed(const RunConfig& c) {
    require(c.seed_set, c.command + ": --seed is required (no wall-clock default)");
}

PriorConfig default_priors() { return PriorConfig{}; }

ResponseMatrix load_matrix(const RunConfig& c, Manifest& manifest) {
    require(!c.responses.empty(), c.command + ": --responses is required");
    manifest.input(c.responses);
    ResponseMatrix matrix = binarize(io::load_responses(c.responses));
    const DegeneratePolicy policy = parse_degenerate_policy(c.filter_policy);
    if (policy == DegeneratePolicy::keep) return matrix;
    FilterResult filtered = filter_degenerate(matrix, policy);
    for (const std::string& id : filtered.excluded_tasks)
        std::cerr << "warning: excluded degenerate task '" << id << "'\n";
    for (const std::string& id : filtered.dropped_models)
        std::cerr << "warning: dropped model '" << id << "' (no observations left)\n";
    return std::move(filtered.matrix);
}

// tasks.csv rows referring to unknown ids are skipped with a warning so
// heterogeneous dumps load; explicit id requests stay hard errors.
std::vector<TaskRecord> join_tasks(const std::vector<TaskRecord>& tasks, const IrtFit& fit) {
    std::vector<TaskRecord> known;
    std::size_t skipped = 0;
    for (const TaskRecord& t : tasks) {
        if (fit.params.task_index(t.task_id) >= 0)
            known.push_back(t);
        else
            ++skipped;
    }
    if (skipped > 0)
        std::cerr << "warning: " << skipped << " task rows not present in the fit; skipped\n";
    return known;
}

void run_fit(const RunConfig& c) {
    require_seed(c);
    Manifest manifest(c);
    ResponseMatrix matrix = load_matrix(c, manifest);
    const PriorConfig priors = default_priors();

    IrtFit fit;
    if (parse_estimator(c.estimator) == Estimator::map)
        fit = fit_map(matrix, priors, c.seed, c.max_iters, c.tol);
    else
        fit = fit_mcmc(matrix, priors, c.chains, c.draws, c.warmup, c.seed);

    if (!fit.diagnostics.converged)
        std::cerr << "warning: fit flagged non-converged; see diagnostics\n";

    io::write_irt_fit(c.out_dir / "irt_fit.json", fit, priors);
    manifest.output("irt_fit.json");
    manifest.write({{"estimator", c.estimator},
                    {"filter", c.filter_policy},
                    {"chains", fmt(c.chains)},
                    {"draws", fmt(c.draws)},
                    {"warmup", fmt(c.warmup)},
                    {"max_iters", fmt(c.max_iters)},
                    {"tol", fmt(c.tol)}});
}

void run_calibrate(const RunConfig& c) {
    require(!c.fit_file.empty(), "calibrate: --fit is required");
    require(!c.tasks.empty(), "calibrate: --tasks is required");
    Manifest manifest(c);
    manifest.input(c.fit_file);
    manifest.input(c.tasks);

    const IrtFit fit = io::load_irt_fit(c.fit_file);
    const std::vector<TaskRecord> tasks = join_tasks(io::load_tasks(c.tasks), fit);

    std::vector<std::pair<double, double>> pairs;
    std::vector<double> weights;
    for (const TaskRecord& t : tasks) {
        if (!t.human_minutes) continue;
        const auto i = static_cast<std::size_t>(fit.params.task_index(t.task_id));
        if (fit.unreliable[i] && !c.include_unreliable) continue;
        pairs.emplace_back(fit.params.b[i], *t.human_minutes);
        const double se = std::max(fit.se_b[i], 1e-6);
        weights.push_back(1.0 / (se * se));
    }
    const TimeCalibration cal = c.weighted ? fit_calibration_weighted(pairs, weights)
                                           : fit_calibration(pairs);

    io::write_calibration(c.out_dir / "calibration.json", cal,
                          io::checksum_file(c.fit_file));
    manifest.output("calibration.json");
    manifest.write({{"weighted", c.weighted ? "true" : "false"},
                    {"include_unreliable", c.include_unreliable ? "true" : "false"}});
}

void run_predict_time(const RunConfig& c) {
    require(!c.fit_file.empty(), "predict-time: --fit is required");
    require(!c.calibration_file.empty(), "predict-time: --calibration is required");
    Manifest manifest(c);
    manifest.input(c.fit_file);
    manifest.input(c.calibration_file);

    const IrtFit fit = io::load_irt_fit(c.fit_file);
    const TimeCalibration cal = io::load_calibration(c.calibration_file);

    std::vector<io::Prediction> preds;
    preds.reserve(fit.params.task_ids.size());
    for (std::size_t i = 0; i < fit.params.task_ids.size(); ++i) {
        io::Prediction p;
        p.task_id = fit.params.task_ids[i];
        p.minutes = predict_time(cal, fit.params.b[i]);
        std::tie(p.low, p.high) = predict_time_interval(cal, fit.params.b[i], fit.se_b[i]);
        p.unreliable = fit.unreliable[i];
        preds.push_back(std::move(p));
    }

    if (c.format == "json") {
        io::write_predictions_json(c.out_dir / "predictions.json", preds);
        manifest.output("predictions.json");
    } else {
        io::write_predictions_csv(c.out_dir / "predictions.csv", preds);
        manifest.output("predictions.csv");
    }
    manifest.write({{"format", c.format}});
}

void run_baseline(const RunConfig& c) {
    Manifest manifest(c);
    ResponseMatrix matrix = load_matrix(c, manifest);
    const BaselineScores scores = baseline_scores(matrix);
    io::write_baseline_scores(c.out_dir / "baseline_scores.json", scores);
    manifest.output("baseline_scores.json");

    if (!c.tasks.empty()) {
        manifest.input(c.tasks);
        const std::vector<TaskRecord> tasks = io::load_tasks(c.tasks);
        const TimeCalibration cal = fit_baseline_calibration(scores, tasks);
        io::write_calibration(c.out_dir / "baseline_calibration.json", cal,
                              io::checksum_file(c.out_dir / "baseline_scores.json"));
        manifest.output("baseline_calibration.json");
    }
    manifest.write({{"filter", c.filter_policy}});
}

void run_eval(const RunConfig& c) {
    require(!c.predictions_file.empty(), "eval: --predictions is required");
    require(!c.tasks.empty(), "eval: --tasks is required");
    Manifest manifest(c);
    manifest.input(c.predictions_file);
    manifest.input(c.tasks);

    const std::vector<io::Prediction> preds = io::load_predictions(c.predictions_file);
    const std::vector<TaskRecord> tasks = io::load_tasks(c.tasks);
    std::map<std::string, const TaskRecord*> by_id;
    for (const TaskRecord& t : tasks) by_id[t.task_id] = &t;

    std::optional<BucketScheme> scheme;
    if (!c.bucket_scheme.empty()) {
        scheme = io::load_bucket_scheme(c.bucket_scheme);
        if (fs::exists(c.bucket_scheme)) manifest.input(c.bucket_scheme);
    }

    std::vector<double> bucket_pred;
    std::vector<std::string> bucket_truth;
    std::vector<double> cont_pred, cont_truth;
    std::size_t matched = 0;
    for (const io::Prediction& p : preds) {
        auto it = by_id.find(p.task_id);
        if (it == by_id.end()) continue;
        ++matched;
        const TaskRecord& t = *it->second;
        if (scheme) {
            std::optional<std::string> truth_label;
            if (t.time_bucket)
                truth_label = *t.time_bucket;
            else if (t.human_minutes)
                truth_label = bucketize(*t.human_minutes, *scheme);
            if (truth_label) {
                bucket_pred.push_back(p.minutes);
                bucket_truth.push_back(*truth_label);
            }
        }
        if (t.human_minutes) {
            cont_pred.push_back(p.minutes);
            cont_truth.push_back(*t.human_minutes);
        }
    }
    require(matched > 0, "eval: no overlap between predictions and tasks");

    EvalReport report;
    bool classification = false;
    if (scheme && !bucket_pred.empty()) {
        report = bucket_report(bucket_pred, bucket_truth, *scheme);
        classification = true;
    }
    if (cont_pred.size() >= 2) {
        const ContinuousReport cont = continuous_report(cont_pred, cont_truth);
        report.r_squared_loglog = cont.r_squared_loglog;
        report.tolerance_band_coverage = cont.tolerance_band_coverage;
    }
    require(classification || cont_pred.size() >= 2,
            "eval: tasks carry neither usable buckets nor continuous times");

    io::write_eval_report(c.out_dir / "eval_report.json", report, classification,
                          scheme ? &*scheme : nullptr);
    manifest.output("eval_report.json");
    manifest.write({{"buckets", c.bucket_scheme}});
}

WindowSpec window_from(const RunConfig& c, int width) {
    WindowSpec w;
    w.width_months = width;
    if (!c.anchor.empty()) w.anchor = parse_date(c.anchor);
    return w;
}

void run_curves(const RunConfig& c) {
    require(!c.fit_file.empty(), "curves: --fit is required");
    require(!c.calibration_file.empty(), "curves: --calibration is required");
    Manifest manifest(c);
    manifest.input(c.fit_file);
    manifest.input(c.calibration_file);

    const IrtFit fit = io::load_irt_fit(c.fit_file);
    const TimeCalibration cal = io::load_calibration(c.calibration_file);

    std::vector<std::string> selected;
    if (!c.model_id.empty()) {
        require(fit.params.model_index(c.model_id) >= 0,
                "curves: unknown model '" + c.model_id + "'");
        selected.push_back(c.model_id);
    } else {
        require(!c.models.empty(), "curves: --models is required to pick frontier models");
        manifest.input(c.models);
        const auto frontier = select_frontier(fit, io::load_models(c.models),
                                              window_from(c, c.curves_window_months));
        for (const FrontierPoint& p : frontier) selected.push_back(p.model_id);
    }

    for (const std::string& id : selected) {
        const SuccessCurve curve = success_curve(fit, cal, id, c.smoothing);
        const std::string name = "curves/" + io::sanitize_filename(id) + ".csv";
        io::write_curve_csv(c.out_dir / name, curve);
        manifest.output(name);
    }
    manifest.write({{"smoothing", fmt(c.smoothing)},
                    {"window_months", fmt(c.curves_window_months)},
                    {"model", c.model_id}});
}

void run_horizon(const RunConfig& c) {
    require(!c.fit_file.empty(), "horizon: --fit is required");
    require(!c.calibration_file.empty(), "horizon: --calibration is required");
    require(!c.models.empty(), "horizon: --models is required");
    Manifest manifest(c);
    manifest.input(c.fit_file);
    manifest.input(c.calibration_file);
    manifest.input(c.models);

    const IrtFit fit = io::load_irt_fit(c.fit_file);
    const TimeCalibration cal = io::load_calibration(c.calibration_file);
    const std::vector<ModelRecord> models = io::load_models(c.models);

    std::map<std::string, Date> dates;
    for (const ModelRecord& m : models) dates[m.model_id] = m.release_date;
    std::vector<std::string> missing;
    for (const std::string& id : fit.params.model_ids)
        if (!dates.count(id)) missing.push_back(id);
    if (!missing.empty()) {
        std::string msg = "horizon: models without release dates:";
        for (const std::string& id : missing) msg += " " + id;
        throw ValidationError(msg);
    }

    std::vector<io::ModelHorizon> horizons;
    for (std::size_t j = 0; j < fit.params.model_ids.size(); ++j) {
        io::ModelHorizon h;
        h.model_id = fit.params.model_ids[j];
        h.release_date = dates.at(h.model_id);
        h.theta = fit.params.theta[j];
        h.p_target = c.p_target;
        if (c.p_target == 0.5) {
            h.horizon_minutes = horizon_at_half(h.theta, cal);
            h.status = horizon_status_name(HorizonStatus::crossed);
        } else {
            const HorizonResult hr = horizon_at_threshold(
                success_curve(fit, cal, h.model_id, c.smoothing), c.p_target);
            h.horizon_minutes = hr.minutes;
            h.status = horizon_status_name(hr.status);
        }
        horizons.push_back(std::move(h));
    }

    if (c.format == "json") {
        io::write_horizons_json(c.out_dir / "horizons.json", horizons);
        manifest.output("horizons.json");
    } else {
        io::write_horizons_csv(c.out_dir / "horizons.csv", horizons);
        manifest.output("horizons.csv");
    }
    manifest.write({{"p", fmt(c.p_target)},
                    {"smoothing", fmt(c.smoothing)},
                    {"format", c.format}});
}

void run_forecast(const RunConfig& c) {
    require_seed(c);
    require(!c.fit_file.empty(), "forecast: --fit is required");
    require(!c.calibration_file.empty(), "forecast: --calibration is required");
    require(!c.models.empty(), "forecast: --models is required");
    Manifest manifest(c);
    manifest.input(c.fit_file);
    manifest.input(c.calibration_file);
    manifest.input(c.models);

    const IrtFit fit = io::load_irt_fit(c.fit_file);
    const TimeCalibration cal = io::load_calibration(c.calibration_file);
    const std::vector<ModelRecord> models = io::load_models(c.models);

    const HorizonForecast forecast =
        forecast_horizons(fit, models, cal, window_from(c, c.window_months), c.p_target,
                          c.smoothing, c.bootstrap_iters, c.seed);
    io::write_forecast(c.out_dir / "forecast.json", forecast);
    manifest.output("forecast.json");
    manifest.write({{"p", fmt(c.p_target)},
                    {"window_months", fmt(c.window_months)},
                    {"smoothing", fmt(c.smoothing)},
                    {"iters", fmt(c.bootstrap_iters)},
                    {"anchor", c.anchor}});
}

void run_synth(const RunConfig& c) {
    require_seed(c);
    Manifest manifest(c);

    SynthSpec spec;
    spec.n_tasks = c.n_tasks;
    spec.n_models = c.n_models;
    spec.missing_fraction = c.missing_fraction;
    spec.a_log_sd = c.a_log_sd;
    spec.b_min = c.b_min;
    spec.b_max = c.b_max;
    if (c.theta_linear)
        spec.theta = ThetaLinear{parse_date(c.date_start), parse_date(c.date_end),
                                 c.theta_slope_per_day, c.theta_noise_sd};
    else
        spec.theta = ThetaStatic{c.theta_sd};
    spec.cal_slope = c.cal_slope;
    spec.cal_intercept = c.cal_intercept;
    spec.cal_noise_sd = c.cal_noise_sd;
    spec.seed = c.seed;

    const SynthData data = generate(spec);
    std::cerr << "synth: density " << data.density << "\n";

    io::write_responses_csv(c.out_dir / "responses.csv", data.matrix);
    io::write_tasks_csv(c.out_dir / "tasks.csv", data.tasks);
    io::write_models_csv(c.out_dir / "models.csv", data.models);
    io::write_synth_truth(c.out_dir / "synth_truth.json", data, spec);
    manifest.output("responses.csv");
    manifest.output("tasks.csv");
    manifest.output("models.csv");
    manifest.output("synth_truth.json");
    manifest.write({{"n_tasks", fmt(c.n_tasks)},
                    {"n_models", fmt(c.n_models)},
                    {"missing", fmt(c.missing_fraction)},
                    {"theta", c.theta_linear ? "linear" : "static"},
                    {"cal_slope", fmt(c.cal_slope)},
                    {"cal_intercept", fmt(c.cal_intercept)},
                    {"cal_noise", fmt(c.cal_noise_sd)}});
}

} // namespace

void run_command(const RunConfig& config) {
    std::error_code ec;
    fs::create_directories(config.out_dir, ec);
    if (ec) throw IoError("cannot create output directory '" + config.out_dir.string() + "'");

    if (config.command == "fit") return run_fit(config);
    if (config.command == "calibrate") return run_calibrate(config);
    if (config.command == "predict-time") return run_predict_time(config);
    if (config.command == "baseline") return run_baseline(config);
    if (config.command == "eval") return run_eval(config);
    if (config.command == "curves") return run_curves(config);
    if (config.command == "horizon") return run_horizon(config);
    if (config.command == "forecast") return run_forecast(config);
    if (config.command == "synth") return run_synth(config);
    throw ValidationError("unknown command '" + config.command + "'");
}

} // namespace irtime
