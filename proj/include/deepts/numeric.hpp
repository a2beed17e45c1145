#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include "deepts/errors.hpp"
#include "deepts/rng.hpp"
#include "deepts/tensor.hpp"

namespace deepts {

/// Glorot/Xavier uniform initialization: samples in
/// +-sqrt(6 / (fan_in + fan_out)). Deterministic per (seed, stream).
/// Fan convention: [in, out] matrices use in/out; conv kernels
/// [filters, channels, width] use channels*width / filters*width; 1-D shapes
/// use the length for both fans.
inline Tensor glorot_init(const std::vector<std::size_t>& shape, SeededRng& rng) {
    if (shape.empty()) throw ValueError("glorot_init: empty shape");
    double fan_in = 0.0, fan_out = 0.0;
    if (shape.size() == 1) {
        fan_in = fan_out = static_cast<double>(shape[0]);
    } else if (shape.size() == 2) {
        fan_in = static_cast<double>(shape[0]);
        fan_out = static_cast<double>(shape[1]);
    } else {
        // receptive field = product of trailing dims past the first two
        double rf = 1.0;
        for (std::size_t i = 2; i < shape.size(); ++i) rf *= static_cast<double>(shape[i]);
        fan_in = static_cast<double>(shape[1]) * rf;
        fan_out = static_cast<double>(shape[0]) * rf;
    }
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    Tensor t(shape);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-limit, limit);
    return t;
}

/// Relative error stable near zero: |a-b| / max(1e-8, |a|+|b|).
inline double relative_error(double a, double b) {
    return std::abs(a - b) / std::max(1e-8, std::abs(a) + std::abs(b));
}

/// Central-difference gradient of a scalar function of a tensor:
/// (f(x + eps*e_i) - f(x - eps*e_i)) / (2 eps) per coordinate. This is the
/// independent oracle every analytic backward pass is checked against.
inline Tensor finite_diff_grad(const std::function<double(const Tensor&)>& f,
                               const Tensor& x, double eps) {
    if (!(eps > 0.0)) throw ValueError("finite_diff_grad: eps must be positive");
    Tensor g(x.shape());
    Tensor probe = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double orig = probe[i];
        probe[i] = orig + eps;
        const double fp = f(probe);
        probe[i] = orig - eps;
        const double fm = f(probe);
        probe[i] = orig;
        if (!std::isfinite(fp) || !std::isfinite(fm)) {
            throw NumericError("finite_diff_grad: non-finite function evaluation");
        }
        g[i] = (fp - fm) / (2.0 * eps);
    }
    return g;
}

/// Max relative error between an analytic gradient and the finite-difference
/// gradient, coordinate-wise.
inline double max_relative_error(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) throw ShapeError("max_relative_error: shape mismatch");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        worst = std::max(worst, relative_error(a[i], b[i]));
    }
    return worst;
}

} // namespace deepts
