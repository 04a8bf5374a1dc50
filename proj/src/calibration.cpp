#include "irtime/calibration.hpp"

#include <cmath>

#include "irtime/common.hpp"

namespace irtime {

namespace {

TimeCalibration ols_log_time(std::span<const std::pair<double, double>> b_minutes,
                             std::span<const double> weights) {
    const std::size_t n = b_minutes.size();
    if (n < 3) throw ValidationError("calibration requires at least 3 (b, minutes) pairs");
    if (!weights.empty() && weights.size() != n)
        throw ValidationError("calibration: weight count does not match pair count");

    double wsum = 0.0, xm = 0.0, ym = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const auto& [b, minutes] = b_minutes[k];
        if (!std::isfinite(b)) throw ValidationError("calibration: non-finite difficulty");
        if (!(minutes > 0) || !std::isfinite(minutes))
            throw ValidationError("calibration: human minutes must be positive");
        const double w = weights.empty() ? 1.0 : weights[k];
        if (!(w > 0)) throw ValidationError("calibration: weights must be positive");
        wsum += w;
        xm += w * b;
        ym += w * std::log(minutes);
    }
    xm /= wsum;
    ym /= wsum;

    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const auto& [b, minutes] = b_minutes[k];
        const double w = weights.empty() ? 1.0 : weights[k];
        const double dx = b - xm, dy = std::log(minutes) - ym;
        sxx += w * dx * dx;
        sxy += w * dx * dy;
        syy += w * dy * dy;
    }
    if (!(sxx > 0))
        throw ValidationError("calibration: zero variance in difficulty, slope undefined");

    TimeCalibration cal;
    cal.n = static_cast<std::int64_t>(n);
    cal.slope = sxy / sxx;
    cal.intercept = ym - cal.slope * xm;

    double ssr = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const auto& [b, minutes] = b_minutes[k];
        const double w = weights.empty() ? 1.0 : weights[k];
        const double r = std::log(minutes) - (cal.slope * b + cal.intercept);
        ssr += w * r * r;
    }
    // syy == 0 would mean sxy == 0 by Cauchy-Schwarz, so ssr == syy; report 1
    cal.r_squared = syy > 0 ? 1.0 - ssr / syy : 1.0;
    if (cal.r_squared < 0) cal.r_squared = 0.0;
    if (cal.r_squared > 1) cal.r_squared = 1.0;

    if (n > 2) {
        const double resid_var = ssr / (static_cast<double>(n) - 2.0);
        cal.se_slope = std::sqrt(resid_var / sxx);
        cal.se_intercept = std::sqrt(resid_var * (1.0 / wsum + xm * xm / sxx));
    }
    return cal;
}

} // namespace

TimeCalibration fit_calibration(std::span<const std::pair<double, double>> b_minutes) {
    return ols_log_time(b_minutes, {});
}

TimeCalibration fit_calibration_weighted(std::span<const std::pair<double, double>> b_minutes,
                                         std::span<const double> weights) {
    if (weights.empty())
        throw ValidationError("fit_calibration_weighted: weights are required");
    return ols_log_time(b_minutes, weights);
}

double predict_time(const TimeCalibration& cal, double b) {
    if (!std::isfinite(b)) throw ValidationError("predict_time: non-finite difficulty");
    return std::exp(cal.slope * b + cal.intercept);
}

std::pair<double, double> predict_time_interval(const TimeCalibration& cal, double b,
                                                double se_b) {
    if (!std::isfinite(b) || !std::isfinite(se_b) || se_b < 0)
        throw ValidationError("predict_time_interval: bad inputs");
    const double lo = predict_time(cal, b - se_b);
    const double hi = predict_time(cal, b + se_b);
    return lo <= hi ? std::pair{lo, hi} : std::pair{hi, lo};
}

} // namespace irtime
