#pragma once

// Test-side oracles, kept deliberately independent of the library code they
// check: plain loops, long-double accumulation, formulas transcribed
// directly rather than shared helpers.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace oracle {

inline double mse(const std::vector<double>& y, const std::vector<double>& yhat) {
    long double s = 0.0L;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const long double d = static_cast<long double>(y[i]) - yhat[i];
        s += d * d;
    }
    return static_cast<double>(s / static_cast<long double>(y.size()));
}

inline double rmse(const std::vector<double>& y, const std::vector<double>& yhat) {
    return std::sqrt(mse(y, yhat));
}

inline double mae(const std::vector<double>& y, const std::vector<double>& yhat) {
    long double s = 0.0L;
    for (std::size_t i = 0; i < y.size(); ++i) {
        s += std::abs(static_cast<long double>(y[i]) - yhat[i]);
    }
    return static_cast<double>(s / static_cast<long double>(y.size()));
}

inline double huber(const std::vector<double>& y, const std::vector<double>& yhat, double delta) {
    long double s = 0.0L;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const long double a = std::abs(static_cast<long double>(y[i]) - yhat[i]);
        s += a <= delta ? 0.5L * a * a : delta * (a - 0.5L * delta);
    }
    return static_cast<double>(s / static_cast<long double>(y.size()));
}

inline double msle(const std::vector<double>& y, const std::vector<double>& yhat) {
    long double s = 0.0L;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const long double d = std::log(1.0L + static_cast<long double>(y[i])) -
                              std::log(1.0L + static_cast<long double>(yhat[i]));
        s += d * d;
    }
    return static_cast<double>(s / static_cast<long double>(y.size()));
}

inline double r2(const std::vector<double>& y, const std::vector<double>& yhat) {
    long double mean = 0.0L;
    for (double v : y) mean += v;
    mean /= static_cast<long double>(y.size());
    long double res = 0.0L, tot = 0.0L;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const long double r = static_cast<long double>(y[i]) - yhat[i];
        const long double d = static_cast<long double>(y[i]) - mean;
        res += r * r;
        tot += d * d;
    }
    return static_cast<double>(1.0L - res / tot);
}

struct Moments {
    double mean, median, std_dev, skewness, kurtosis;
};

inline Moments moments(std::vector<double> v) {
    const std::size_t n = v.size();
    long double mean = 0.0L;
    for (double x : v) mean += x;
    mean /= static_cast<long double>(n);
    long double m2 = 0.0L, m3 = 0.0L, m4 = 0.0L;
    for (double x : v) {
        const long double d = x - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    const long double ss = m2;
    m2 /= static_cast<long double>(n);
    m3 /= static_cast<long double>(n);
    m4 /= static_cast<long double>(n);
    std::sort(v.begin(), v.end());
    Moments out;
    out.mean = static_cast<double>(mean);
    out.median = n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    out.std_dev = static_cast<double>(std::sqrt(ss / static_cast<long double>(n - 1)));
    out.skewness = static_cast<double>(m3 / std::pow(m2, 1.5L));
    out.kurtosis = static_cast<double>(m4 / (m2 * m2) - 3.0L);
    return out;
}

/// One hand-scripted Adam step on a single scalar parameter, fresh state.
inline double adam_single_step(double w, double g, double lr, double b1, double b2, double eps) {
    const double m = (1.0 - b1) * g;
    const double v = (1.0 - b2) * g * g;
    const double mhat = m / (1.0 - b1);
    const double vhat = v / (1.0 - b2);
    return w - lr * mhat / (std::sqrt(vhat) + eps);
}

/// Scalar LSTM gate equations for one step, one unit; transcription of the
/// forget-gate formulation used as the single-step oracle.
struct LstmStepOut {
    double h, c;
};

inline LstmStepOut lstm_scalar_step(double x, double h_prev, double c_prev, double wi, double ui,
                                    double bi, double wf, double uf, double bf, double wo,
                                    double uo, double bo, double wg, double ug, double bg) {
    const auto sig = [](double z) { return 1.0 / (1.0 + std::exp(-z)); };
    const double i = sig(x * wi + h_prev * ui + bi);
    const double f = sig(x * wf + h_prev * uf + bf);
    const double o = sig(x * wo + h_prev * uo + bo);
    const double g = std::tanh(x * wg + h_prev * ug + bg);
    const double c = f * c_prev + i * g;
    const double h = o * std::tanh(c);
    return {h, c};
}

} // namespace oracle
