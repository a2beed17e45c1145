#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "deepts/metrics.hpp"
#include "deepts/numeric.hpp"
#include "deepts/rng.hpp"
#include "oracles.hpp"

using namespace deepts;

namespace {

MetricInput in(const std::vector<double>& y, const std::vector<double>& yhat) {
    return MetricInput{y, yhat};
}

} // namespace

TEST_CASE("identity predictions score perfectly") {
    const std::vector<double> y{0.3, 1.7, -0.2, 5.0};
    REQUIRE(mse(in(y, y)) == 0.0);
    REQUIRE(rmse(in(y, y)) == 0.0);
    REQUIRE(mae(in(y, y)) == 0.0);
    REQUIRE(huber(in(y, y), {1.0}) == 0.0);
    REQUIRE(msle(in(y, y)) == 0.0);
    REQUIRE(r2(in(y, y)) == 1.0);
}

TEST_CASE("hand-computed metric values") {
    const std::vector<double> zeros{0, 0}, ones{1, 1};
    REQUIRE(mse(in(zeros, ones)) == 1.0);
    REQUIRE(rmse(in(zeros, ones)) == 1.0);

    const std::vector<double> y{1, 2, 3};
    const std::vector<double> yhat{1, 2, 4};
    REQUIRE_THAT(mse(in(y, yhat)), Catch::Matchers::WithinAbs(1.0 / 3.0, 1e-15));
    REQUIRE_THAT(rmse(in(y, yhat)), Catch::Matchers::WithinAbs(std::sqrt(1.0 / 3.0), 1e-15));

    const std::vector<double> yh2{2, 4, 6};
    REQUIRE_THAT(mae(in(y, yh2)), Catch::Matchers::WithinAbs(2.0, 1e-15));
    REQUIRE(mae(in({5.0}, {3.0})) == 2.0);

    // Huber, delta = 1: quadratic branch at r=0.5, linear branch at r=2
    REQUIRE_THAT(huber(in({0.5}, {0.0}), {1.0}), Catch::Matchers::WithinAbs(0.125, 1e-15));
    REQUIRE_THAT(huber(in({2.0}, {0.0}), {1.0}), Catch::Matchers::WithinAbs(1.5, 1e-15));

    // msle: log(1+0) - log(1+(e-1)) = -1, squared 1
    REQUIRE_THAT(msle(in({0.0}, {std::exp(1.0) - 1.0})), Catch::Matchers::WithinAbs(1.0, 1e-12));

    // r2: mean prediction scores 0, worse than mean goes negative
    const std::vector<double> ybar{2, 2, 2};
    REQUIRE_THAT(r2(in(y, ybar)), Catch::Matchers::WithinAbs(0.0, 1e-15));
    REQUIRE(r2(in(y, {10, -10, 10})) < 0.0);
}

TEST_CASE("metric error contracts") {
    REQUIRE_THROWS_AS(mse(in({1, 2}, {1})), ShapeError);
    REQUIRE_THROWS_AS(mse(in({}, {})), ValueError);
    REQUIRE_THROWS_AS(huber(in({1}, {1}), {0.0}), ValueError);
    REQUIRE_THROWS_AS(huber(in({1}, {1}), {-2.0}), ValueError);
    REQUIRE_THROWS_AS(msle(in({-1.0}, {0.0})), ValueError);
    REQUIRE_THROWS_AS(r2(in({5.0}, {3.0})), ValueError);       // n < 2
    REQUIRE_THROWS_AS(r2(in({2, 2, 2}, {1, 2, 3})), ValueError); // constant y
    const double nan = std::numeric_limits<double>::quiet_NaN();
    REQUIRE_THROWS_AS(mse(in({nan}, {0.0})), NumericError);
}

TEST_CASE("all six metrics match the brute-force oracle on random inputs") {
    SeededRng rng(4242);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + rng.below(999);
        std::vector<double> y(n), yhat(n);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = rng.uniform(-0.9, 10.0); // keep msle in domain
            yhat[i] = rng.uniform(-0.9, 10.0);
        }
        const double delta = rng.uniform(0.1, 3.0);
        const MetricSet m = all_metrics(in(y, yhat), {delta});
        REQUIRE(relative_error(m.mse, oracle::mse(y, yhat)) < 1e-9);
        REQUIRE(relative_error(m.rmse, oracle::rmse(y, yhat)) < 1e-9);
        REQUIRE(relative_error(m.mae, oracle::mae(y, yhat)) < 1e-9);
        REQUIRE(relative_error(m.huber, oracle::huber(y, yhat, delta)) < 1e-9);
        REQUIRE(m.msle.has_value());
        REQUIRE(relative_error(*m.msle, oracle::msle(y, yhat)) < 1e-9);
        REQUIRE(relative_error(m.r2, oracle::r2(y, yhat)) < 1e-9);
    }
}

TEST_CASE("rmse squared equals mse") {
    SeededRng rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 1 + rng.below(200);
        std::vector<double> y(n), yhat(n);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = rng.uniform(-100.0, 100.0);
            yhat[i] = rng.uniform(-100.0, 100.0);
        }
        const double r = rmse(in(y, yhat));
        const double m = mse(in(y, yhat));
        REQUIRE(std::abs(r * r - m) <= 1e-12 * std::max(1.0, m));
    }
}

TEST_CASE("error metrics vanish exactly iff prediction equals actual") {
    SeededRng rng(7);
    std::vector<double> y(64), yhat(64);
    for (std::size_t i = 0; i < y.size(); ++i) {
        y[i] = rng.uniform(0.0, 5.0);
        yhat[i] = y[i];
    }
    yhat[10] += 1e-6;
    REQUIRE(mse(in(y, yhat)) > 0.0);
    REQUIRE(mae(in(y, yhat)) > 0.0);
    REQUIRE(huber(in(y, yhat), {1.0}) > 0.0);
    REQUIRE(msle(in(y, yhat)) > 0.0);
}

TEST_CASE("huber limits: quadratic for huge delta, linear for huge residuals") {
    SeededRng rng(55);
    std::vector<double> y(128), yhat(128);
    for (std::size_t i = 0; i < y.size(); ++i) {
        y[i] = rng.uniform(-3.0, 3.0);
        yhat[i] = rng.uniform(-3.0, 3.0);
    }
    // bounded residuals: huber at delta=1e6 equals mse/2
    const double h = huber(in(y, yhat), {1e6});
    REQUIRE(std::abs(h - 0.5 * mse(in(y, yhat))) < 1e-9);

    // large residuals: huber/(delta*mae) -> 1 from below
    std::vector<double> big(64), zero(64, 0.0);
    for (std::size_t i = 0; i < big.size(); ++i) big[i] = rng.uniform(1000.0, 2000.0);
    const double ratio = huber(in(big, zero), {1.0}) / (1.0 * mae(in(big, zero)));
    REQUIRE(ratio < 1.0);
    REQUIRE(ratio > 0.999);
}

TEST_CASE("all_metrics marks msle undefined without dropping the rest") {
    const std::vector<double> y{-1.0, 2.0, 3.0};
    const std::vector<double> yhat{0.0, 2.0, 3.0};
    const MetricSet m = all_metrics(in(y, yhat));
    REQUIRE_FALSE(m.msle.has_value());
    REQUIRE(m.mse > 0.0);
    REQUIRE(m.rmse > 0.0);
    REQUIRE(std::isfinite(m.r2));
}

TEST_CASE("all_metrics on identical vectors") {
    const std::vector<double> y{1, 2, 3};
    const MetricSet m = all_metrics(in(y, y));
    REQUIRE(m.rmse == 0.0);
    REQUIRE(m.mse == 0.0);
    REQUIRE(m.huber == 0.0);
    REQUIRE(m.mae == 0.0);
    REQUIRE(m.msle.has_value());
    REQUIRE(*m.msle == 0.0);
    REQUIRE(m.r2 == 1.0);
}

TEST_CASE("metric diffs: test minus train, antisymmetric") {
    const std::vector<double> y{1, 2, 3, 4};
    MetricSet train = all_metrics(in(y, {1.5, 2.5, 3.5, 4.5}));
    MetricSet test = all_metrics(in(y, {1.2, 2.2, 3.2, 4.2}));

    const DiffSet d = metric_diff(test, train);
    REQUIRE_THAT(d.mse_diff, Catch::Matchers::WithinAbs(test.mse - train.mse, 1e-15));
    // test scored better here, so the error diffs are negative
    REQUIRE(d.rmse_diff < 0.0);
    REQUIRE(d.r2s_diff > 0.0);

    const DiffSet rev = metric_diff(train, test);
    REQUIRE(rev.rmse_diff == -d.rmse_diff);
    REQUIRE(rev.mse_diff == -d.mse_diff);
    REQUIRE(rev.loss_diff == -d.loss_diff);
    REQUIRE(rev.mae_diff == -d.mae_diff);
    REQUIRE(*rev.msle_diff == -*d.msle_diff);
    REQUIRE(rev.r2s_diff == -d.r2s_diff);
}

TEST_CASE("hand-worked diff example: train rmse 1.0, test rmse 0.8") {
    MetricSet train, test;
    train.rmse = 1.0;
    test.rmse = 0.8;
    const DiffSet d = metric_diff(test, train);
    REQUIRE_THAT(d.rmse_diff, Catch::Matchers::WithinAbs(-0.2, 1e-15));
    // train r2 0.9, test r2 0.7
    train.r2 = 0.9;
    test.r2 = 0.7;
    const DiffSet d2 = metric_diff(test, train);
    REQUIRE_THAT(d2.r2s_diff, Catch::Matchers::WithinAbs(-0.2, 1e-15));
}

TEST_CASE("equal metric sets give an all-zero diff") {
    const std::vector<double> y{1, 2, 3};
    MetricSet m = all_metrics(in(y, {2, 2, 2.5}));
    const DiffSet d = metric_diff(m, m);
    REQUIRE(d.rmse_diff == 0.0);
    REQUIRE(d.mse_diff == 0.0);
    REQUIRE(d.loss_diff == 0.0);
    REQUIRE(d.mae_diff == 0.0);
    REQUIRE(*d.msle_diff == 0.0);
    REQUIRE(d.r2s_diff == 0.0);
}

TEST_CASE("undefined msle propagates through diffs") {
    MetricSet a, b;
    a.msle = 0.5;
    b.msle.reset();
    REQUIRE_FALSE(metric_diff(a, b).msle_diff.has_value());
    REQUIRE_FALSE(metric_diff(b, a).msle_diff.has_value());
}
