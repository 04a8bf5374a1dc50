#include <iostream>

#include <CLI11.hpp>

#include "irtime/common.hpp"
#include "irtime/runner.hpp"

// Exit codes: 0 success, 2 validation error, 3 IO error.

namespace {

void add_seed(CLI::App* cmd, irtime::RunConfig& c) {
    cmd->add_option_function<std::uint64_t>(
           "--seed",
           [&c](const std::uint64_t& s) {
               c.seed = s;
               c.seed_set = true;
           },
           "RNG seed (required for randomized commands)");
}

void add_common(CLI::App* cmd, irtime::RunConfig& c) {
    cmd->add_option("--out-dir", c.out_dir, "output directory (default: current)");
    cmd->add_option("--format", c.format, "tabular output format")
        ->check(CLI::IsMember({"csv", "json"}));
    add_seed(cmd, c);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"latent task difficulty, human-time calibration, and capability "
                 "horizon forecasting from sparse model x task outcomes"};
    app.require_subcommand(1);

    irtime::RunConfig c;

    auto* fit = app.add_subcommand("fit", "fit the 2PL latent-trait model");
    fit->add_option("--responses", c.responses, "responses.csv or .jsonl")->required();
    fit->add_option("--estimator", c.estimator, "map or mcmc")
        ->check(CLI::IsMember({"map", "mcmc"}));
    fit->add_option("--filter", c.filter_policy,
                    "degenerate-task policy: keep, drop_all_fail, "
                    "drop_all_fail_and_all_pass");
    fit->add_option("--chains", c.chains, "MCMC chains (>= 2)");
    fit->add_option("--draws", c.draws, "MCMC iterations per chain, warmup included");
    fit->add_option("--warmup", c.warmup, "MCMC adaptation iterations");
    fit->add_option("--max-iters", c.max_iters, "MAP iteration cap");
    fit->add_option("--tol", c.tol, "MAP convergence tolerance");
    add_common(fit, c);

    auto* calibrate = app.add_subcommand("calibrate", "fit the log-linear time map");
    calibrate->add_option("--fit", c.fit_file, "irt_fit.json")->required();
    calibrate->add_option("--tasks", c.tasks, "tasks.csv with human_minutes")->required();
    calibrate->add_flag("--weighted", c.weighted, "weight pairs by 1/se_b^2");
    calibrate->add_flag("--include-unreliable", c.include_unreliable,
                        "keep all-fail/all-pass tasks in the regression");
    add_common(calibrate, c);

    auto* predict = app.add_subcommand("predict-time", "predict human minutes per task");
    predict->add_option("--fit", c.fit_file, "irt_fit.json")->required();
    predict->add_option("--calibration", c.calibration_file, "calibration.json")->required();
    add_common(predict, c);

    auto* baseline = app.add_subcommand("baseline", "success-rate difficulty/ability scores");
    baseline->add_option("--responses", c.responses, "responses.csv or .jsonl")->required();
    baseline->add_option("--tasks", c.tasks,
                         "tasks.csv; also fits baseline_calibration.json");
    baseline->add_option("--filter", c.filter_policy, "degenerate-task policy");
    add_common(baseline, c);

    auto* eval = app.add_subcommand("eval", "score predictions against ground truth");
    eval->add_option("--predictions", c.predictions_file, "predictions.csv or .json")
        ->required();
    eval->add_option("--tasks", c.tasks, "tasks.csv with truth columns")->required();
    eval->add_option("--buckets", c.bucket_scheme,
                     "bucket scheme JSON path or preset 'swe-verified'");
    add_common(eval, c);

    auto* curves = app.add_subcommand("curves", "success-vs-time curves");
    curves->add_option("--fit", c.fit_file, "irt_fit.json")->required();
    curves->add_option("--calibration", c.calibration_file, "calibration.json")->required();
    curves->add_option("--models", c.models, "models.csv (for frontier selection)");
    curves->add_option("--model", c.model_id, "single model id instead of the frontier");
    curves->add_option("--smoothing", c.smoothing, "sliding window in tasks");
    curves->add_option("--window-months", c.curves_window_months,
                       "release window width for frontier selection");
    curves->add_option("--anchor", c.anchor, "window grid origin (YYYY-MM-DD)");
    add_common(curves, c);

    auto* horizon = app.add_subcommand("horizon", "solvable-task-length per model");
    horizon->add_option("--fit", c.fit_file, "irt_fit.json")->required();
    horizon->add_option("--calibration", c.calibration_file, "calibration.json")->required();
    horizon->add_option("--models", c.models, "models.csv")->required();
    horizon->add_option("--p", c.p_target, "success threshold (default 0.5)");
    horizon->add_option("--smoothing", c.smoothing, "curve window for p != 0.5");
    add_common(horizon, c);

    auto* forecast = app.add_subcommand("forecast", "frontier trend with bootstrap CI");
    forecast->add_option("--fit", c.fit_file, "irt_fit.json")->required();
    forecast->add_option("--calibration", c.calibration_file, "calibration.json")->required();
    forecast->add_option("--models", c.models, "models.csv")->required();
    forecast->add_option("--p", c.p_target, "success threshold (default 0.5)");
    forecast->add_option("--window-months", c.window_months, "release window width");
    forecast->add_option("--smoothing", c.smoothing, "curve window for p != 0.5");
    forecast->add_option("--anchor", c.anchor, "window grid origin (YYYY-MM-DD)");
    forecast->add_option("--iters", c.bootstrap_iters, "bootstrap resamples");
    add_common(forecast, c);

    auto* synth = app.add_subcommand("synth", "seeded synthetic dataset with known truth");
    synth->add_option("--n-tasks", c.n_tasks, "task count");
    synth->add_option("--n-models", c.n_models, "model count");
    synth->add_option("--missing", c.missing_fraction, "missing-cell fraction in [0,1)");
    synth->add_option("--a-log-sd", c.a_log_sd, "sd of log discrimination");
    synth->add_option("--b-min", c.b_min, "difficulty range lower end");
    synth->add_option("--b-max", c.b_max, "difficulty range upper end");
    synth->add_flag("--theta-linear", c.theta_linear, "abilities linear in release date");
    synth->add_option("--theta-sd", c.theta_sd, "ability sd (static schedule)");
    synth->add_option("--date-start", c.date_start, "first release date");
    synth->add_option("--date-end", c.date_end, "last release date");
    synth->add_option("--theta-slope-per-day", c.theta_slope_per_day,
                      "ability slope (linear schedule)");
    synth->add_option("--theta-noise", c.theta_noise_sd, "ability noise sd");
    synth->add_option("--cal-slope", c.cal_slope, "planted ln-minutes per unit b");
    synth->add_option("--cal-intercept", c.cal_intercept, "planted ln-minutes at b = 0");
    synth->add_option("--cal-noise", c.cal_noise_sd, "sd of noise on ln minutes");
    add_common(synth, c);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return 2;
    }

    c.command = app.get_subcommands().front()->get_name();
    try {
        irtime::run_command(c);
    } catch (const irtime::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const irtime::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
