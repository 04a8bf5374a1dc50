#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "irtime/calibration.hpp"
#include "irtime/data.hpp"
#include "irtime/irt.hpp"

namespace irtime {

// Abilities drawn i.i.d. normal; release dates evenly spaced anyway so the
// same output files feed every command.
struct ThetaStatic {
    double sd = 1.2;
};

// Abilities linear in release date (centered), plus noise.
struct ThetaLinear {
    Date start{2023, 1, 1};
    Date end{2025, 1, 1};
    double slope_per_day = 0.004;
    double noise_sd = 0.15;
};

struct SynthSpec {
    int n_tasks = 200;
    int n_models = 60;
    double missing_fraction = 0.49;
    double a_log_mean = 0.0;
    double a_log_sd = 0.3;
    double b_min = -2.5;
    double b_max = 2.5;
    std::variant<ThetaStatic, ThetaLinear> theta = ThetaStatic{};
    double cal_slope = 0.8153648132841944; // ln 2.26
    double cal_intercept = 3.0;            // ln minutes at b = 0
    double cal_noise_sd = 0.4;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SynthData {
    ResponseMatrix matrix;
    std::vector<TaskRecord> tasks;
    std::vector<ModelRecord> models;
    Irt2plParams truth;
    TimeCalibration truth_cal; // slope/intercept only; fit stats zero
    double density = 0.0;
};

// Bernoulli draws from the planted parameters with a uniform observation
// mask. Every task and model keeps at least one observed cell; the mask is
// redrawn up to 100 times before giving up. Fully determined by the seed.
SynthData generate(const SynthSpec& spec);

// Brute-force grid maximizer of the single-task log-likelihood with all
// other parameters fixed; the independent check for the fitters.
double oracle_b_grid(const ResponseMatrix& matrix, double a,
                     std::span<const double> theta, const std::string& task_id,
                     std::span<const double> grid);

} // namespace irtime
