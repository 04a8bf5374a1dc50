#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

namespace irtime {

// One CLI invocation's worth of configuration. Commands read and write only
// the documented file formats; every run leaves a run_manifest.json with
// the config echo and input checksums, and no output embeds wall-clock
// state, so identical manifests imply byte-identical artifacts.
struct RunConfig {
    std::string command;
    std::filesystem::path out_dir = ".";
    std::string format = "csv"; // predict-time / horizon output format
    std::uint64_t seed = 0;
    bool seed_set = false;

    // input paths
    std::filesystem::path responses;
    std::filesystem::path tasks;
    std::filesystem::path models;
    std::filesystem::path fit_file;
    std::filesystem::path calibration_file;
    std::filesystem::path predictions_file;
    std::string bucket_scheme; // path or preset name

    // fit
    std::string estimator = "map";
    std::string filter_policy = "keep";
    int chains = 4;
    int draws = 2000;
    int warmup = 1000;
    int max_iters = 1000;
    double tol = 1e-8;

    // calibrate
    bool weighted = false;
    bool include_unreliable = false;

    // curves / horizon / forecast
    double p_target = 0.5;
    int smoothing = 15;
    int window_months = 2;        // forecast windows
    int curves_window_months = 5; // curve model selection windows
    std::string model_id;         // curves: explicit model instead of frontier
    std::string anchor;           // window grid origin, ISO date
    int bootstrap_iters = 2000;

    // synth
    int n_tasks = 200;
    int n_models = 60;
    double missing_fraction = 0.49;
    double a_log_sd = 0.3;
    double b_min = -2.5;
    double b_max = 2.5;
    bool theta_linear = false;
    double theta_sd = 1.2;
    std::string date_start = "2023-01-01";
    std::string date_end = "2025-01-01";
    double theta_slope_per_day = 0.004;
    double theta_noise_sd = 0.15;
    double cal_slope = 0.8153648132841944; // ln 2.26
    double cal_intercept = 3.0;
    double cal_noise_sd = 0.4;
};

// Dispatches on config.command. Throws ValidationError / IoError; flagged
// statistical conditions (non-convergence, censored horizons) are recorded
// in the outputs instead of failing the run.
void run_command(const RunConfig& config);

} // namespace irtime
