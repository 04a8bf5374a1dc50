#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "irtime/common.hpp"
#include "irtime/metrics.hpp"

using namespace irtime;

namespace {

// Independent kappa oracle: agreement formulation with normalized
// similarity weights, numerically distinct from the library's disagreement
// route.
double kappa_oracle(const std::vector<std::vector<std::int64_t>>& confusion) {
    const std::size_t K = confusion.size();
    std::vector<double> row(K, 0), col(K, 0);
    double total = 0;
    for (std::size_t i = 0; i < K; ++i)
        for (std::size_t j = 0; j < K; ++j) {
            row[i] += double(confusion[i][j]);
            col[j] += double(confusion[i][j]);
            total += double(confusion[i][j]);
        }
    double po = 0, pe = 0;
    for (std::size_t i = 0; i < K; ++i)
        for (std::size_t j = 0; j < K; ++j) {
            const double di = double(i) - double(j);
            const double v = 1.0 - di * di / double((K - 1) * (K - 1));
            po += v * double(confusion[i][j]) / total;
            pe += v * (row[i] / total) * (col[j] / total);
        }
    if (pe >= 1.0) return 1.0;
    return (po - pe) / (1.0 - pe);
}

} // namespace

TEST_CASE("bucketize follows the boundary-in-lower-bucket rule") {
    const BucketScheme scheme = BucketScheme::swe_verified();
    CHECK(bucketize(14.9, scheme) == "<15m");
    CHECK(bucketize(15.0, scheme) == "<15m"); // boundary inclusive below
    CHECK(bucketize(15.0001, scheme) == "15m-1h");
    CHECK(bucketize(60.0, scheme) == "15m-1h");
    CHECK(bucketize(240.0, scheme) == "1h-4h");
    CHECK(bucketize(300.0, scheme) == ">4h");
    CHECK_THROWS_AS(bucketize(0.0, scheme), ValidationError);
    CHECK_THROWS_AS(bucketize(-3.0, scheme), ValidationError);
}

TEST_CASE("bucket schemes are validated") {
    CHECK_THROWS_AS((BucketScheme{{"a"}, {}}).validate(), ValidationError);
    CHECK_THROWS_AS((BucketScheme{{"a", "b"}, {1.0, 2.0}}).validate(), ValidationError);
    CHECK_THROWS_AS((BucketScheme{{"a", "b", "c"}, {5.0, 5.0}}).validate(), ValidationError);
    CHECK_NOTHROW(BucketScheme::swe_verified().validate());
}

TEST_CASE("quadratic weighted kappa on frozen hand matrices") {
    const std::vector<std::vector<std::int64_t>> m1{
        {10, 2, 0, 0}, {3, 8, 1, 0}, {0, 2, 7, 2}, {0, 0, 1, 9}};
    const std::vector<std::vector<std::int64_t>> m2{
        {5, 5, 5, 5}, {5, 5, 5, 5}, {5, 5, 5, 5}, {5, 5, 5, 5}};
    const std::vector<std::vector<std::int64_t>> m3{
        {0, 0, 0, 12}, {0, 0, 9, 0}, {0, 7, 0, 0}, {11, 0, 0, 0}};

    // frozen expected values, spreadsheet-style computation
    CHECK(quadratic_weighted_kappa(m1) ==
          doctest::Approx(0.9033391915641477).epsilon(1e-12));
    CHECK(quadratic_weighted_kappa(m2) == doctest::Approx(0.0));
    CHECK(quadratic_weighted_kappa(m3) ==
          doctest::Approx(-0.9942673698692959).epsilon(1e-12));

    for (const auto& m : {m1, m2, m3})
        CHECK(std::abs(quadratic_weighted_kappa(m) - kappa_oracle(m)) < 1e-10);
}

TEST_CASE("kappa is one exactly on diagonal matrices and only then among these") {
    const std::vector<std::vector<std::int64_t>> diag{
        {7, 0, 0, 0}, {0, 3, 0, 0}, {0, 0, 11, 0}, {0, 0, 0, 2}};
    CHECK(quadratic_weighted_kappa(diag) == 1.0);

    std::vector<std::vector<std::int64_t>> off = diag;
    off[0][3] = 4;
    CHECK(quadratic_weighted_kappa(off) < 1.0);
}

TEST_CASE("kappa is zero for independence-structured matrices") {
    // outer product of margins: O[i][j] = r[i] * c[j]
    const std::vector<std::int64_t> r{1, 2, 3, 4}, c{4, 3, 2, 1};
    std::vector<std::vector<std::int64_t>> m(4, std::vector<std::int64_t>(4));
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) m[i][j] = r[i] * c[j];
    CHECK(std::abs(quadratic_weighted_kappa(m)) < 1e-12);
}

TEST_CASE("bucket_report on perfect predictions") {
    const BucketScheme scheme = BucketScheme::swe_verified();
    const std::vector<double> pred{5.0, 30.0, 100.0, 500.0, 7.0, 90.0};
    const std::vector<std::string> truth{"<15m", "15m-1h", "1h-4h", ">4h", "<15m", "1h-4h"};
    const EvalReport rep = bucket_report(pred, truth, scheme);
    CHECK(rep.overall_accuracy == 1.0);
    CHECK(rep.weighted_macro_f1 == doctest::Approx(1.0));
    CHECK(rep.weighted_kappa == 1.0);
    for (const auto& [label, stat] : rep.per_bucket_accuracy)
        if (stat.n > 0) CHECK(stat.accuracy == 1.0);
}

TEST_CASE("constant majority predictions score chance-level kappa") {
    const BucketScheme scheme = BucketScheme::swe_verified();
    std::vector<double> pred;
    std::vector<std::string> truth;
    for (int i = 0; i < 30; ++i) {
        pred.push_back(30.0); // always the second bucket
        truth.push_back(i < 12 ? "15m-1h" : (i < 22 ? "<15m" : ">4h"));
    }
    const EvalReport rep = bucket_report(pred, truth, scheme);
    CHECK(std::abs(rep.weighted_kappa) < 1e-12);
    CHECK(rep.overall_accuracy == doctest::Approx(12.0 / 30.0));
}

TEST_CASE("bucket_report is invariant to permuting the tasks") {
    const BucketScheme scheme = BucketScheme::swe_verified();
    std::vector<double> pred{5, 20, 90, 400, 10, 70, 250, 30, 14, 61};
    std::vector<std::string> truth{"<15m", "15m-1h", "15m-1h", ">4h", "1h-4h",
                                   "1h-4h", ">4h",   "<15m",  "<15m", "1h-4h"};
    const EvalReport before = bucket_report(pred, truth, scheme);

    std::vector<std::size_t> order(pred.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::mt19937 shuffle_rng(9);
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    std::vector<double> pred2;
    std::vector<std::string> truth2;
    for (std::size_t i : order) {
        pred2.push_back(pred[i]);
        truth2.push_back(truth[i]);
    }
    const EvalReport after = bucket_report(pred2, truth2, scheme);
    CHECK(after.overall_accuracy == before.overall_accuracy);
    CHECK(after.weighted_macro_f1 == doctest::Approx(before.weighted_macro_f1).epsilon(1e-15));
    CHECK(after.weighted_kappa == doctest::Approx(before.weighted_kappa).epsilon(1e-15));
}

TEST_CASE("bucket_report input validation") {
    const BucketScheme scheme = BucketScheme::swe_verified();
    CHECK_THROWS_AS(bucket_report({}, {}, scheme), ValidationError);
    const std::vector<double> pred{10.0};
    const std::vector<std::string> bad_label{"banana"};
    CHECK_THROWS_AS(bucket_report(pred, bad_label, scheme), ValidationError);
}

TEST_CASE("continuous_report on exact and scaled predictions") {
    const std::vector<double> truth{1.0, 2.0, 4.0, 8.0, 64.0};

    const ContinuousReport exact = continuous_report(truth, truth);
    CHECK(exact.tolerance_band_coverage == 1.0);
    CHECK(*exact.r_squared_loglog == doctest::Approx(1.0));

    std::vector<double> doubled;
    for (double t : truth) doubled.push_back(2.0 * t); // exact powers of two
    const ContinuousReport at_boundary = continuous_report(doubled, truth);
    CHECK(at_boundary.tolerance_band_coverage == 1.0); // band endpoints inclusive
    CHECK(*at_boundary.r_squared_loglog == doctest::Approx(1.0));

    std::vector<double> halved;
    for (double t : truth) halved.push_back(0.5 * t);
    CHECK(continuous_report(halved, truth).tolerance_band_coverage == 1.0);

    std::vector<double> tripled;
    for (double t : truth) tripled.push_back(3.0 * t);
    CHECK(continuous_report(tripled, truth).tolerance_band_coverage == 0.0);
}

TEST_CASE("tolerance band is symmetric under swapping prediction and truth") {
    const std::vector<double> a{1.0, 3.0, 10.0, 40.0, 100.0, 7.0};
    const std::vector<double> b{1.9, 1.6, 21.0, 39.0, 260.0, 3.4};
    CHECK(continuous_report(a, b).tolerance_band_coverage ==
          continuous_report(b, a).tolerance_band_coverage);
}

TEST_CASE("degenerate variance omits r-squared but keeps coverage") {
    const std::vector<double> pred{10.0, 10.0, 10.0};
    const std::vector<double> truth{8.0, 10.0, 30.0};
    const ContinuousReport rep = continuous_report(pred, truth);
    CHECK_FALSE(rep.r_squared_loglog.has_value());
    CHECK(rep.tolerance_band_coverage == doctest::Approx(2.0 / 3.0));

    const std::vector<double> single{1.0};
    CHECK_THROWS_AS(continuous_report(single, single), ValidationError);
    const std::vector<double> neg{1.0, -2.0};
    const std::vector<double> ok{1.0, 2.0};
    CHECK_THROWS_AS(continuous_report(neg, ok), ValidationError);
}
