#include "irtime/metrics.hpp"

#include <cmath>

#include "irtime/common.hpp"

namespace irtime {

void BucketScheme::validate() const {
    if (labels.size() < 2)
        throw ValidationError("bucket scheme needs at least 2 labels");
    if (upper_bounds_minutes.size() + 1 != labels.size())
        throw ValidationError("bucket scheme needs exactly one fewer bound than labels");
    for (std::size_t i = 0; i < upper_bounds_minutes.size(); ++i) {
        if (!(upper_bounds_minutes[i] > 0))
            throw ValidationError("bucket bounds must be positive");
        if (i > 0 && !(upper_bounds_minutes[i] > upper_bounds_minutes[i - 1]))
            throw ValidationError("bucket bounds must be strictly increasing");
    }
}

int BucketScheme::label_index(const std::string& label) const {
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == label) return static_cast<int>(i);
    return -1;
}

BucketScheme BucketScheme::swe_verified() {
    return BucketScheme{{"<15m", "15m-1h", "1h-4h", ">4h"}, {15.0, 60.0, 240.0}};
}

std::string bucketize(double minutes, const BucketScheme& scheme) {
    scheme.validate();
    if (!(minutes > 0) || !std::isfinite(minutes))
        throw ValidationError("bucketize: minutes must be positive and finite");
    for (std::size_t i = 0; i < scheme.upper_bounds_minutes.size(); ++i)
        if (minutes <= scheme.upper_bounds_minutes[i]) return scheme.labels[i];
    return scheme.labels.back();
}

double quadratic_weighted_kappa(const std::vector<std::vector<std::int64_t>>& confusion) {
    const std::size_t K = confusion.size();
    if (K < 2) throw ValidationError("kappa: confusion matrix must be at least 2x2");
    for (const auto& row : confusion)
        if (row.size() != K) throw ValidationError("kappa: confusion matrix must be square");

    std::vector<double> row_sum(K, 0.0), col_sum(K, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < K; ++i)
        for (std::size_t j = 0; j < K; ++j) {
            if (confusion[i][j] < 0) throw ValidationError("kappa: negative count");
            const auto v = static_cast<double>(confusion[i][j]);
            row_sum[i] += v;
            col_sum[j] += v;
            total += v;
        }
    if (total <= 0) throw ValidationError("kappa: empty confusion matrix");

    const double norm = static_cast<double>((K - 1) * (K - 1));
    double observed = 0.0, expected = 0.0;
    for (std::size_t i = 0; i < K; ++i)
        for (std::size_t j = 0; j < K; ++j) {
            const double di = static_cast<double>(i) - static_cast<double>(j);
            const double w = di * di / norm;
            observed += w * static_cast<double>(confusion[i][j]);
            expected += w * row_sum[i] * col_sum[j] / total;
        }
    // all marginal mass in one class: no possible disagreement, agreement is
    // perfect by construction
    if (expected <= 0) return 1.0;
    return 1.0 - observed / expected;
}

EvalReport bucket_report(std::span<const double> pred_minutes,
                         std::span<const std::string> truth_buckets,
                         const BucketScheme& scheme) {
    scheme.validate();
    if (pred_minutes.size() != truth_buckets.size())
        throw ValidationError("bucket_report: prediction/truth lengths differ");
    if (pred_minutes.empty())
        throw ValidationError("bucket_report: no tasks with both prediction and truth bucket");

    const std::size_t K = scheme.labels.size();
    std::vector<std::vector<std::int64_t>> confusion(K, std::vector<std::int64_t>(K, 0));
    for (std::size_t k = 0; k < pred_minutes.size(); ++k) {
        int truth = scheme.label_index(truth_buckets[k]);
        if (truth < 0)
            throw ValidationError("bucket_report: truth label '" + truth_buckets[k] +
                                  "' is not in the scheme");
        int pred = scheme.label_index(bucketize(pred_minutes[k], scheme));
        ++confusion[static_cast<std::size_t>(truth)][static_cast<std::size_t>(pred)];
    }

    EvalReport report;
    const auto total = static_cast<double>(pred_minutes.size());
    double correct = 0.0, f1_sum = 0.0;
    for (std::size_t c = 0; c < K; ++c) {
        std::int64_t support = 0, tp = confusion[c][c], pred_count = 0;
        for (std::size_t j = 0; j < K; ++j) {
            support += confusion[c][j];
            pred_count += confusion[j][c];
        }
        correct += static_cast<double>(tp);
        BucketStat stat;
        stat.n = support;
        stat.accuracy = support > 0 ? static_cast<double>(tp) / static_cast<double>(support)
                                    : 0.0;
        report.per_bucket_accuracy.emplace_back(scheme.labels[c], stat);

        const double precision =
            pred_count > 0 ? static_cast<double>(tp) / static_cast<double>(pred_count) : 0.0;
        const double recall = stat.accuracy;
        const double f1 =
            precision + recall > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
        f1_sum += static_cast<double>(support) / total * f1;
    }
    report.overall_accuracy = correct / total;
    report.weighted_macro_f1 = f1_sum;
    report.weighted_kappa = quadratic_weighted_kappa(confusion);
    return report;
}

ContinuousReport continuous_report(std::span<const double> pred_minutes,
                                   std::span<const double> truth_minutes) {
    if (pred_minutes.size() != truth_minutes.size())
        throw ValidationError("continuous_report: prediction/truth lengths differ");
    const std::size_t n = pred_minutes.size();
    if (n < 2) throw ValidationError("continuous_report: need at least 2 pairs");

    double covered = 0.0, xm = 0.0, ym = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        if (!(pred_minutes[k] > 0) || !(truth_minutes[k] > 0))
            throw ValidationError("continuous_report: minutes must be positive");
        const double ratio = pred_minutes[k] / truth_minutes[k];
        if (ratio >= 0.5 && ratio <= 2.0) covered += 1.0; // band endpoints inclusive
        xm += std::log(truth_minutes[k]);
        ym += std::log(pred_minutes[k]);
    }
    xm /= static_cast<double>(n);
    ym /= static_cast<double>(n);

    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double dx = std::log(truth_minutes[k]) - xm;
        const double dy = std::log(pred_minutes[k]) - ym;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }

    ContinuousReport report;
    report.tolerance_band_coverage = covered / static_cast<double>(n);
    if (sxx > 0 && syy > 0) {
        // r^2 of ln(pred) on ln(truth) around the OLS line: 1 - SSR/SST
        const double slope = sxy / sxx;
        double ssr = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double dy = std::log(pred_minutes[k]) - ym;
            const double dx = std::log(truth_minutes[k]) - xm;
            const double r = dy - slope * dx;
            ssr += r * r;
        }
        report.r_squared_loglog = 1.0 - ssr / syy;
    }
    return report;
}

} // namespace irtime
