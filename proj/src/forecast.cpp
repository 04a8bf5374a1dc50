#include "irtime/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "irtime/common.hpp"
#include "irtime/rng.hpp"

namespace irtime {

void WindowSpec::validate() const {
    if (width_months < 1) throw ValidationError("window width must be >= 1 month");
}

std::vector<FrontierPoint> select_frontier(const IrtFit& fit,
                                           const std::vector<ModelRecord>& models,
                                           const WindowSpec& window) {
    window.validate();
    if (models.empty()) throw ValidationError("select_frontier: no dated models");

    std::map<std::string, Date> dates;
    for (const ModelRecord& m : models) dates[m.model_id] = m.release_date;

    std::vector<std::string> missing;
    for (const std::string& id : fit.params.model_ids)
        if (!dates.count(id)) missing.push_back(id);
    if (!missing.empty()) {
        std::string msg = "select_frontier: models without release dates:";
        for (const std::string& id : missing) msg += " " + id;
        throw ValidationError(msg);
    }

    Date anchor = window.anchor.value_or([&] {
        Date earliest = dates.at(fit.params.model_ids.front());
        for (const std::string& id : fit.params.model_ids)
            earliest = std::min(earliest, dates.at(id));
        return earliest;
    }());

    // window k covers [anchor + k*w months, anchor + (k+1)*w months);
    // boundaries are derived from the anchor directly so day-clamping does
    // not compound
    auto window_index = [&](const Date& d) {
        const int approx = ((d.year - anchor.year) * 12 +
                            (static_cast<int>(d.month) - static_cast<int>(anchor.month))) /
                           window.width_months;
        for (int k = approx - 2; k <= approx + 2; ++k) {
            if (k < 0) continue;
            if (add_months(anchor, k * window.width_months) <= d &&
                d < add_months(anchor, (k + 1) * window.width_months))
                return k;
        }
        throw ValidationError("select_frontier: release date precedes the window anchor: " +
                              format_date(d));
    };

    std::map<int, FrontierPoint> best;
    for (std::size_t j = 0; j < fit.params.model_ids.size(); ++j) {
        const std::string& id = fit.params.model_ids[j];
        const Date date = dates.at(id);
        const double theta = fit.params.theta[j];
        const int k = window_index(date);

        FrontierPoint candidate;
        candidate.window_start = add_months(anchor, k * window.width_months);
        candidate.model_id = id;
        candidate.release_date = date;
        candidate.theta = theta;

        auto it = best.find(k);
        if (it == best.end()) {
            best.emplace(k, std::move(candidate));
            continue;
        }
        FrontierPoint& cur = it->second;
        const bool wins = candidate.theta > cur.theta ||
                          (candidate.theta == cur.theta &&
                           (candidate.release_date < cur.release_date ||
                            (candidate.release_date == cur.release_date &&
                             candidate.model_id < cur.model_id)));
        if (wins) cur = std::move(candidate);
    }

    std::vector<FrontierPoint> frontier;
    frontier.reserve(best.size());
    for (auto& [k, point] : best) frontier.push_back(std::move(point));
    return frontier;
}

double horizon_at_half(double theta, const TimeCalibration& cal) {
    return predict_time(cal, theta);
}

SuccessCurve success_curve(const IrtFit& fit, const TimeCalibration& cal,
                           const std::string& model_id, int smoothing) {
    if (smoothing < 1) throw ValidationError("success_curve: smoothing window must be >= 1");
    const int j = fit.params.model_index(model_id);
    if (j < 0) throw ValidationError("success_curve: unknown model '" + model_id + "'");
    const std::size_t T = fit.params.task_ids.size();
    if (T < static_cast<std::size_t>(smoothing))
        throw ValidationError("success_curve: only " + std::to_string(T) +
                              " tasks for smoothing window " + std::to_string(smoothing) +
                              "; use a smaller window");

    const double theta = fit.params.theta[static_cast<std::size_t>(j)];

    struct TaskPoint {
        double h, p, p_minus, p_plus;
    };
    std::vector<TaskPoint> pts;
    pts.reserve(T);
    for (std::size_t i = 0; i < T; ++i) {
        const double a = fit.params.a[i], b = fit.params.b[i], se = fit.se_b[i];
        TaskPoint tp;
        tp.h = predict_time(cal, b);
        tp.p = irf(a, b, theta);
        // harder-by-one-SE lowers p, easier-by-one-SE raises it
        tp.p_minus = irf(a, b + se, theta);
        tp.p_plus = irf(a, b - se, theta);
        pts.push_back(tp);
    }
    std::sort(pts.begin(), pts.end(), [](const TaskPoint& x, const TaskPoint& y) {
        return x.h < y.h;
    });

    SuccessCurve curve;
    curve.model_id = model_id;
    curve.smoothing_window = smoothing;
    const std::size_t w = static_cast<std::size_t>(smoothing);
    curve.points.reserve(T - w + 1);
    for (std::size_t lo = 0; lo + w <= T; ++lo) {
        CurvePoint cp;
        for (std::size_t k = lo; k < lo + w; ++k) {
            cp.h += pts[k].h;
            cp.p += pts[k].p;
            cp.p_low += pts[k].p_minus;
            cp.p_high += pts[k].p_plus;
        }
        const double dw = static_cast<double>(w);
        cp.h /= dw;
        cp.p /= dw;
        cp.p_low /= dw;
        cp.p_high /= dw;
        curve.points.push_back(cp);
    }
    return curve;
}

std::string horizon_status_name(HorizonStatus s) {
    switch (s) {
    case HorizonStatus::crossed: return "crossed";
    case HorizonStatus::below_range: return "below_range";
    case HorizonStatus::right_censored: return "right_censored";
    }
    return "crossed";
}

HorizonResult horizon_at_threshold(const SuccessCurve& curve, double p_target) {
    if (!(p_target > 0) || !(p_target < 1))
        throw ValidationError("horizon_at_threshold: target must lie in (0, 1)");
    if (curve.points.empty())
        throw ValidationError("horizon_at_threshold: empty curve");

    bool any_at_or_above = false, any_below = false;
    for (const CurvePoint& cp : curve.points) {
        if (cp.p >= p_target) any_at_or_above = true;
        if (cp.p < p_target) any_below = true;
    }
    if (!any_at_or_above) return {0.0, HorizonStatus::below_range};
    if (!any_below) return {curve.points.back().h, HorizonStatus::right_censored};

    // last crossing on the ln-h axis; heterogeneous tasks make curves
    // non-monotone, so scan from the right
    for (std::size_t k = curve.points.size() - 1; k > 0; --k) {
        const CurvePoint& lo = curve.points[k - 1];
        const CurvePoint& hi = curve.points[k];
        const double d0 = lo.p - p_target, d1 = hi.p - p_target;
        if ((d0 >= 0 && d1 <= 0) || (d0 <= 0 && d1 >= 0)) {
            if (d0 == d1) return {hi.h, HorizonStatus::crossed};
            const double t = d0 / (d0 - d1);
            const double ln_h = std::log(lo.h) + t * (std::log(hi.h) - std::log(lo.h));
            return {std::exp(ln_h), HorizonStatus::crossed};
        }
    }
    // curve starts below the target and only reaches it at the first point
    return {curve.points.front().h, HorizonStatus::crossed};
}

namespace {

struct TrendSample {
    double x; // days since epoch
    double y; // log2 horizon minutes
};

TrendFit fit_trend_samples(const std::vector<TrendSample>& samples) {
    double xm = 0.0, ym = 0.0;
    for (const TrendSample& s : samples) {
        xm += s.x;
        ym += s.y;
    }
    const double n = static_cast<double>(samples.size());
    xm /= n;
    ym /= n;
    double sxx = 0.0, sxy = 0.0;
    for (const TrendSample& s : samples) {
        sxx += (s.x - xm) * (s.x - xm);
        sxy += (s.x - xm) * (s.y - ym);
    }
    if (!(sxx > 0)) throw ValidationError("fit_trend: zero variance in release dates");

    TrendFit fit;
    fit.slope_log2_minutes_per_day = sxy / sxx;
    fit.intercept_log2 = ym - fit.slope_log2_minutes_per_day * xm;
    if (fit.slope_log2_minutes_per_day == 0.0) {
        fit.finite = false;
        fit.doubling_months = std::numeric_limits<double>::infinity();
    } else {
        fit.doubling_months = 1.0 / fit.slope_log2_minutes_per_day / kDaysPerMonth;
    }
    return fit;
}

std::vector<TrendSample> to_samples(const std::vector<FrontierPoint>& frontier) {
    if (frontier.size() < 3)
        throw ValidationError("trend fit needs at least 3 frontier points");
    std::vector<TrendSample> samples;
    samples.reserve(frontier.size());
    for (const FrontierPoint& p : frontier) {
        if (!(p.horizon_minutes > 0))
            throw ValidationError("trend fit: frontier point '" + p.model_id +
                                  "' has no positive horizon");
        samples.push_back(TrendSample{static_cast<double>(days_since_epoch(p.release_date)),
                                      std::log2(p.horizon_minutes)});
    }
    return samples;
}

} // namespace

TrendFit fit_trend(const std::vector<FrontierPoint>& frontier) {
    return fit_trend_samples(to_samples(frontier));
}

BootstrapCi bootstrap_trend(const std::vector<FrontierPoint>& frontier, int iters,
                            std::uint64_t seed, double point_estimate) {
    if (iters < 1) throw ValidationError("bootstrap_trend: iters must be >= 1");
    const std::vector<TrendSample> samples = to_samples(frontier);
    const std::size_t n = samples.size();

    std::vector<double> doublings;
    doublings.reserve(static_cast<std::size_t>(iters));
    for (int it = 0; it < iters; ++it) {
        Rng rng = Rng::derive(seed, static_cast<std::uint64_t>(it));
        std::vector<TrendSample> resample(n);
        for (int attempt = 0;; ++attempt) {
            std::set<double> distinct;
            for (std::size_t k = 0; k < n; ++k) {
                resample[k] = samples[rng.uniform_int(n)];
                distinct.insert(resample[k].x);
            }
            if (distinct.size() >= 2) break;
            if (attempt >= 1000)
                throw ValidationError("bootstrap_trend: cannot draw a non-degenerate resample");
        }
        const TrendFit fit = fit_trend_samples(resample);
        if (std::isfinite(fit.doubling_months)) doublings.push_back(fit.doubling_months);
    }
    if (doublings.empty())
        throw ValidationError("bootstrap_trend: every resample produced a degenerate trend");

    std::sort(doublings.begin(), doublings.end());
    auto percentile = [&](double q) {
        // linear interpolation between order statistics at rank (n-1)q
        const double pos = q * static_cast<double>(doublings.size() - 1);
        const std::size_t lo = static_cast<std::size_t>(pos);
        if (lo + 1 >= doublings.size()) return doublings.back();
        const double frac = pos - static_cast<double>(lo);
        return doublings[lo] + frac * (doublings[lo + 1] - doublings[lo]);
    };

    BootstrapCi ci;
    ci.ci_low = percentile(0.025);
    ci.ci_high = percentile(0.975);
    ci.finite_resamples = static_cast<std::int64_t>(doublings.size());
    ci.inverted = !(ci.ci_low <= point_estimate && point_estimate <= ci.ci_high);
    return ci;
}

HorizonForecast forecast_horizons(const IrtFit& fit, const std::vector<ModelRecord>& models,
                                  const TimeCalibration& cal, const WindowSpec& window,
                                  double p_target, int smoothing, int bootstrap_iters,
                                  std::uint64_t seed) {
    HorizonForecast forecast;
    forecast.frontier = select_frontier(fit, models, window);
    forecast.p_target = p_target;
    forecast.window_months = window.width_months;
    forecast.smoothing = smoothing;
    forecast.bootstrap_iters = bootstrap_iters;
    forecast.seed = seed;

    Date anchor = forecast.frontier.front().window_start;
    for (const FrontierPoint& p : forecast.frontier) anchor = std::min(anchor, p.window_start);
    forecast.anchor = window.anchor.value_or(anchor);

    for (FrontierPoint& p : forecast.frontier) {
        if (p_target == 0.5) {
            p.horizon_minutes = horizon_at_half(p.theta, cal);
            p.horizon_status = horizon_status_name(HorizonStatus::crossed);
        } else {
            const SuccessCurve curve = success_curve(fit, cal, p.model_id, smoothing);
            const HorizonResult hr = horizon_at_threshold(curve, p_target);
            p.horizon_minutes = hr.minutes;
            p.horizon_status = horizon_status_name(hr.status);
        }
    }

    std::vector<FrontierPoint> usable;
    for (const FrontierPoint& p : forecast.frontier)
        if (p.horizon_status == "crossed" && p.horizon_minutes > 0) usable.push_back(p);
    if (usable.size() < 3)
        throw ValidationError("forecast: fewer than 3 frontier points with usable horizons");

    forecast.trend = fit_trend(usable);
    forecast.ci =
        bootstrap_trend(usable, bootstrap_iters, seed, forecast.trend.doubling_months);
    return forecast;
}

} // namespace irtime
