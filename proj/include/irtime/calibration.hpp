#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace irtime {

// Log-linear map between latent difficulty and human completion time:
// ln(minutes) = slope * b + intercept. Natural log throughout; display
// conversions happen at the reporting edge.
struct TimeCalibration {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::int64_t n = 0;
    double se_slope = 0.0;
    double se_intercept = 0.0;
};

// OLS of ln(minutes) on b. Needs >= 3 pairs, positive minutes, and
// non-constant b.
TimeCalibration fit_calibration(std::span<const std::pair<double, double>> b_minutes);

// Weighted variant (weights on the squared residuals); off by default in
// every pipeline, available behind an explicit flag.
TimeCalibration fit_calibration_weighted(std::span<const std::pair<double, double>> b_minutes,
                                         std::span<const double> weights);

double predict_time(const TimeCalibration& cal, double b);

// +-1 SE band on b pushed through the time map; returned as (low, high).
std::pair<double, double> predict_time_interval(const TimeCalibration& cal, double b,
                                                double se_b);

} // namespace irtime
