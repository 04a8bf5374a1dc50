#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "irtime/baseline.hpp"
#include "irtime/calibration.hpp"
#include "irtime/data.hpp"
#include "irtime/forecast.hpp"
#include "irtime/irt.hpp"
#include "irtime/metrics.hpp"
#include "irtime/synth.hpp"

namespace irtime::io {

// responses: CSV columns model_id,task_id,successes,trials (or outcome with
// implied trials = 1); a .jsonl path switches to one JSON object per line
// with the same keys.
std::vector<RawOutcome> load_responses(const std::filesystem::path& path);
std::vector<TaskRecord> load_tasks(const std::filesystem::path& path);
std::vector<ModelRecord> load_models(const std::filesystem::path& path);

// Path to a scheme JSON, or a preset name ("swe-verified").
BucketScheme load_bucket_scheme(const std::string& path_or_preset);

std::string render_irt_fit(const IrtFit& fit, const PriorConfig& priors);
void write_irt_fit(const std::filesystem::path& path, const IrtFit& fit,
                   const PriorConfig& priors);
IrtFit load_irt_fit(const std::filesystem::path& path);

void write_calibration(const std::filesystem::path& path, const TimeCalibration& cal,
                       const std::string& source_fit_checksum);
TimeCalibration load_calibration(const std::filesystem::path& path);

void write_baseline_scores(const std::filesystem::path& path, const BaselineScores& scores);

void write_eval_report(const std::filesystem::path& path, const EvalReport& report,
                       bool classification_present, const BucketScheme* scheme);

void write_forecast(const std::filesystem::path& path, const HorizonForecast& forecast);

void write_curve_csv(const std::filesystem::path& path, const SuccessCurve& curve);

struct Prediction {
    std::string task_id;
    double minutes = 0.0;
    double low = 0.0;
    double high = 0.0;
    bool unreliable = false;
};

void write_predictions_csv(const std::filesystem::path& path,
                           const std::vector<Prediction>& preds);
void write_predictions_json(const std::filesystem::path& path,
                            const std::vector<Prediction>& preds);
// reads the prediction file written above (csv or json by extension)
std::vector<Prediction> load_predictions(const std::filesystem::path& path);

struct ModelHorizon {
    std::string model_id;
    Date release_date;
    double theta = 0.0;
    double p_target = 0.5;
    double horizon_minutes = 0.0;
    std::string status;
};

void write_horizons_csv(const std::filesystem::path& path,
                        const std::vector<ModelHorizon>& horizons);
void write_horizons_json(const std::filesystem::path& path,
                         const std::vector<ModelHorizon>& horizons);

void write_synth_truth(const std::filesystem::path& path, const SynthData& data,
                       const SynthSpec& spec);
void write_responses_csv(const std::filesystem::path& path, const ResponseMatrix& matrix);
void write_tasks_csv(const std::filesystem::path& path, const std::vector<TaskRecord>& tasks);
void write_models_csv(const std::filesystem::path& path,
                      const std::vector<ModelRecord>& models);

std::string checksum_file(const std::filesystem::path& path);

// model ids become file names for curve output
std::string sanitize_filename(const std::string& id);

} // namespace irtime::io
