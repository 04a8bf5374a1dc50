#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace irtime {

// Ordered completion-time categories. upper_bounds_minutes has one fewer
// entry than labels; the last label is unbounded above.
struct BucketScheme {
    std::vector<std::string> labels;
    std::vector<double> upper_bounds_minutes;

    void validate() const;
    int label_index(const std::string& label) const;

    // <15 min, 15-60 min, 1-4 h, >4 h
    static BucketScheme swe_verified();
};

// Boundary values belong to the lower bucket (minutes <= bound).
std::string bucketize(double minutes, const BucketScheme& scheme);

struct BucketStat {
    double accuracy = 0.0;
    std::int64_t n = 0;
};

struct EvalReport {
    std::vector<std::pair<std::string, BucketStat>> per_bucket_accuracy; // scheme order
    double overall_accuracy = 0.0;
    double weighted_macro_f1 = 0.0;
    double weighted_kappa = 0.0;
    std::optional<double> r_squared_loglog;
    std::optional<double> tolerance_band_coverage;
};

// kappa = 1 - (weighted observed disagreement / weighted expected
// disagreement) with quadratic weights ((i-j)/(K-1))^2.
double quadratic_weighted_kappa(const std::vector<std::vector<std::int64_t>>& confusion);

// Classification metrics of predicted minutes against truth bucket labels.
// Per-bucket accuracy is recall over tasks whose truth is that bucket;
// macro F1 is support-weighted.
EvalReport bucket_report(std::span<const double> pred_minutes,
                         std::span<const std::string> truth_buckets,
                         const BucketScheme& scheme);

struct ContinuousReport {
    std::optional<double> r_squared_loglog; // absent when either side is constant
    double tolerance_band_coverage = 0.0;   // fraction with pred/truth in [0.5, 2]
};

ContinuousReport continuous_report(std::span<const double> pred_minutes,
                                   std::span<const double> truth_minutes);

} // namespace irtime
