#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "deepts/errors.hpp"

namespace deepts {

/// Actual/predicted pair fed to every metric. Lengths must agree, n >= 1,
/// values finite.
struct MetricInput {
    std::span<const double> y;    // actual
    std::span<const double> yhat; // predicted
};

inline void validate_metric_input(const MetricInput& in) {
    if (in.y.size() != in.yhat.size()) {
        throw ShapeError("metrics: y and yhat lengths differ (" + std::to_string(in.y.size()) +
                         " vs " + std::to_string(in.yhat.size()) + ")");
    }
    if (in.y.empty()) throw ValueError("metrics: empty input");
    for (std::size_t i = 0; i < in.y.size(); ++i) {
        if (!std::isfinite(in.y[i]) || !std::isfinite(in.yhat[i])) {
            throw NumericError("metrics: non-finite input value");
        }
    }
}

struct HuberParams {
    double delta = 1.0;
};

/// Mean squared error: (1/n) sum (y - yhat)^2.
inline double mse(const MetricInput& in) {
    validate_metric_input(in);
    double s = 0.0;
    for (std::size_t i = 0; i < in.y.size(); ++i) {
        const double d = in.y[i] - in.yhat[i];
        s += d * d;
    }
    return s / static_cast<double>(in.y.size());
}

/// Root mean squared error: sqrt(mse).
inline double rmse(const MetricInput& in) { return std::sqrt(mse(in)); }

/// Mean absolute error: (1/n) sum |y - yhat|.
inline double mae(const MetricInput& in) {
    validate_metric_input(in);
    double s = 0.0;
    for (std::size_t i = 0; i < in.y.size(); ++i) s += std::abs(in.y[i] - in.yhat[i]);
    return s / static_cast<double>(in.y.size());
}

/// Huber loss, averaged over samples: 1/2 r^2 for |r| <= delta, else
/// delta (|r| - delta/2), with residual r = y - yhat.
inline double huber(const MetricInput& in, const HuberParams& p) {
    if (!(p.delta > 0.0)) throw ValueError("huber: delta must be positive");
    validate_metric_input(in);
    double s = 0.0;
    for (std::size_t i = 0; i < in.y.size(); ++i) {
        const double r = std::abs(in.y[i] - in.yhat[i]);
        s += r <= p.delta ? 0.5 * r * r : p.delta * (r - 0.5 * p.delta);
    }
    return s / static_cast<double>(in.y.size());
}

/// Mean squared logarithmic error: (1/n) sum (log(1+y) - log(1+yhat))^2.
/// Requires 1+y and 1+yhat positive.
inline double msle(const MetricInput& in) {
    validate_metric_input(in);
    double s = 0.0;
    for (std::size_t i = 0; i < in.y.size(); ++i) {
        if (in.y[i] <= -1.0 || in.yhat[i] <= -1.0) {
            throw ValueError("msle: value outside the log(1+x) domain");
        }
        const double d = std::log1p(in.y[i]) - std::log1p(in.yhat[i]);
        s += d * d;
    }
    return s / static_cast<double>(in.y.size());
}

/// Coefficient of determination: 1 - SS_res / SS_tot. Requires n >= 2 and a
/// non-constant actual series.
inline double r2(const MetricInput& in) {
    validate_metric_input(in);
    const std::size_t n = in.y.size();
    if (n < 2) throw ValueError("r2: requires n >= 2");
    double mean = 0.0;
    for (double v : in.y) mean += v;
    mean /= static_cast<double>(n);
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = in.y[i] - in.yhat[i];
        const double d = in.y[i] - mean;
        ss_res += r * r;
        ss_tot += d * d;
    }
    if (ss_tot <= 0.0) throw ValueError("r2: constant actual series (zero variance)");
    return 1.0 - ss_res / ss_tot;
}

/// The six benchmark metrics on one evaluation set. msle is absent when any
/// value fell outside the log(1+x) domain; the other five never are.
struct MetricSet {
    double rmse = 0.0;
    double mse = 0.0;
    double huber = 0.0;
    double mae = 0.0;
    std::optional<double> msle;
    double r2 = 0.0;
};

inline MetricSet all_metrics(const MetricInput& in, const HuberParams& p = {}) {
    MetricSet m;
    m.mse = mse(in);
    m.rmse = std::sqrt(m.mse);
    m.huber = huber(in, p);
    m.mae = mae(in);
    try {
        m.msle = msle(in);
    } catch (const ValueError&) {
        m.msle.reset(); // domain failure marks the one metric undefined
    }
    m.r2 = r2(in);
    return m;
}

/// Test-minus-train gaps, the Fig.-3 quantities. A negative value means the
/// test set scored lower (better for error metrics).
struct DiffSet {
    double rmse_diff = 0.0;
    double mse_diff = 0.0;
    double loss_diff = 0.0; // huber
    double mae_diff = 0.0;
    std::optional<double> msle_diff;
    double r2s_diff = 0.0;
};

inline DiffSet metric_diff(const MetricSet& test, const MetricSet& train) {
    DiffSet d;
    d.rmse_diff = test.rmse - train.rmse;
    d.mse_diff = test.mse - train.mse;
    d.loss_diff = test.huber - train.huber;
    d.mae_diff = test.mae - train.mae;
    if (test.msle.has_value() && train.msle.has_value()) {
        d.msle_diff = *test.msle - *train.msle;
    }
    d.r2s_diff = test.r2 - train.r2;
    return d;
}

} // namespace deepts
