#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "irtime/calibration.hpp"
#include "irtime/dates.hpp"
#include "irtime/irt.hpp"

namespace irtime {

// Fixed month/day conversion, declared in every forecast output.
inline constexpr double kDaysPerMonth = 30.44;

struct WindowSpec {
    int width_months = 2;
    std::optional<Date> anchor; // default: earliest release date

    void validate() const;
};

// Highest-ability model within one release window. horizon_minutes is
// filled by the horizon step that follows frontier selection.
struct FrontierPoint {
    Date window_start;
    std::string model_id;
    Date release_date;
    double theta = 0.0;
    double horizon_minutes = 0.0;
    std::string horizon_status = "pending"; // crossed | below_range | right_censored
};

// One frontier point per non-empty window; theta is the window maximum,
// ties broken by earlier release date then lexicographic model id.
std::vector<FrontierPoint> select_frontier(const IrtFit& fit,
                                           const std::vector<ModelRecord>& models,
                                           const WindowSpec& window);

// At a 50% success threshold the solvable difficulty equals theta, so the
// horizon is just the time map evaluated there.
double horizon_at_half(double theta, const TimeCalibration& cal);

struct CurvePoint {
    double h = 0.0; // minutes
    double p = 0.0;
    double p_low = 0.0;
    double p_high = 0.0;
};

struct SuccessCurve {
    std::string model_id;
    int smoothing_window = 15;
    std::vector<CurvePoint> points; // ascending in h
};

// Success probability against predicted human time for one model: tasks
// sorted by predicted time, then a sliding mean of `smoothing` consecutive
// tasks over (h, p). The band recomputes p at b_i -+ se_b within each
// window.
SuccessCurve success_curve(const IrtFit& fit, const TimeCalibration& cal,
                           const std::string& model_id, int smoothing = 15);

enum class HorizonStatus { crossed, below_range, right_censored };

std::string horizon_status_name(HorizonStatus s);

struct HorizonResult {
    double minutes = 0.0; // max observed h when right-censored; 0 when below range
    HorizonStatus status = HorizonStatus::crossed;
};

// Largest h where the smoothed curve crosses p_target, interpolated
// linearly in (ln h, p). Curves that never reach the target are
// below-range; curves that never drop under it are right-censored.
HorizonResult horizon_at_threshold(const SuccessCurve& curve, double p_target);

struct TrendFit {
    double slope_log2_minutes_per_day = 0.0;
    double intercept_log2 = 0.0;
    double doubling_months = 0.0;
    bool finite = true; // false when the fitted slope is exactly zero
};

// OLS of log2(horizon) on release date in days; doubling_months =
// 1 / slope / 30.44.
TrendFit fit_trend(const std::vector<FrontierPoint>& frontier);

struct BootstrapCi {
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::int64_t finite_resamples = 0;
    bool inverted = false; // point estimate fell outside [ci_low, ci_high]
};

// Resamples frontier points with replacement (per-iteration RNG streams),
// refits the trend, and takes the 2.5/97.5 percentiles of the finite
// doubling times. Resamples with < 2 distinct dates are redrawn.
BootstrapCi bootstrap_trend(const std::vector<FrontierPoint>& frontier, int iters,
                            std::uint64_t seed, double point_estimate);

struct HorizonForecast {
    std::vector<FrontierPoint> frontier;
    TrendFit trend;
    BootstrapCi ci;
    int bootstrap_iters = 0;
    std::uint64_t seed = 0;
    double p_target = 0.5;
    int window_months = 2;
    Date anchor;
    int smoothing = 15; // used only when p_target != 0.5
};

// select_frontier -> horizons -> fit_trend -> bootstrap_trend. For
// p_target != 0.5 horizons come from each frontier model's smoothed curve;
// only crossed points enter the trend fit.
HorizonForecast forecast_horizons(const IrtFit& fit, const std::vector<ModelRecord>& models,
                                  const TimeCalibration& cal, const WindowSpec& window,
                                  double p_target, int smoothing, int bootstrap_iters,
                                  std::uint64_t seed);

} // namespace irtime
