#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "deepts/errors.hpp"

namespace deepts {

/// Dense n-dimensional float64 array, row-major. Carrier of all weights,
/// activations, gradients and metric vectors. Treated as an immutable value
/// once returned from an operation; copies are cheap enough at desk scale.
class Tensor {
public:
    Tensor() = default;

    /// Zero-filled tensor of the given shape.
    explicit Tensor(std::vector<std::size_t> shape)
        : shape_(std::move(shape)), data_(checked_size(shape_), 0.0) {}

    Tensor(std::vector<std::size_t> shape, std::vector<double> data)
        : shape_(std::move(shape)), data_(std::move(data)) {
        if (data_.size() != checked_size(shape_)) {
            throw ShapeError("Tensor: data length " + std::to_string(data_.size()) +
                             " does not match shape size " + std::to_string(checked_size(shape_)));
        }
    }

    static Tensor scalar(double v) { return Tensor({1}, {v}); }

    static Tensor zeros(std::vector<std::size_t> shape) { return Tensor(std::move(shape)); }

    static Tensor full(std::vector<std::size_t> shape, double v) {
        Tensor t(std::move(shape));
        for (auto& x : t.data_) x = v;
        return t;
    }

    /// 2-D helper for tests and builders: rows of equal length.
    static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows) {
        std::size_t r = rows.size();
        std::size_t c = r == 0 ? 0 : rows.begin()->size();
        std::vector<double> data;
        data.reserve(r * c);
        for (const auto& row : rows) {
            if (row.size() != c) throw ShapeError("Tensor::matrix: ragged rows");
            data.insert(data.end(), row.begin(), row.end());
        }
        return Tensor({r, c}, std::move(data));
    }

    static Tensor vector(std::vector<double> v) {
        std::size_t n = v.size();
        return Tensor({n}, std::move(v));
    }

    static Tensor identity(std::size_t n) {
        Tensor t({n, n});
        for (std::size_t i = 0; i < n; ++i) t.data_[i * n + i] = 1.0;
        return t;
    }

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }
    std::size_t dim(std::size_t i) const { return shape_.at(i); }
    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    double& at(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
    double at(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }

    double& at(std::size_t i, std::size_t j, std::size_t k) {
        return data_[(i * shape_[1] + j) * shape_[2] + k];
    }
    double at(std::size_t i, std::size_t j, std::size_t k) const {
        return data_[(i * shape_[1] + j) * shape_[2] + k];
    }

    /// Same data, new shape; total size must match.
    Tensor reshaped(std::vector<std::size_t> shape) const {
        Tensor t;
        t.shape_ = std::move(shape);
        if (checked_size(t.shape_) != data_.size()) {
            throw ShapeError("reshape: size mismatch");
        }
        t.data_ = data_;
        return t;
    }

    bool all_finite() const {
        for (double v : data_) {
            if (!std::isfinite(v)) return false;
        }
        return true;
    }

    std::string shape_str() const {
        std::ostringstream os;
        os << '[';
        for (std::size_t i = 0; i < shape_.size(); ++i) {
            if (i) os << 'x';
            os << shape_[i];
        }
        os << ']';
        return os.str();
    }

private:
    static std::size_t checked_size(const std::vector<std::size_t>& shape) {
        std::size_t n = 1;
        for (std::size_t d : shape) {
            if (d == 0) throw ShapeError("Tensor: zero dimension in shape");
            n *= d;
        }
        return shape.empty() ? 0 : n;
    }

    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

inline void check_finite(const Tensor& t, const char* where) {
    if (!t.all_finite()) {
        throw NumericError(std::string(where) + ": non-finite value in result");
    }
}

/// Standard matrix product [m x k] * [k x n]. The k-summation runs in
/// ascending index order for every output element, so results are
/// bit-identical across runs.
inline Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2) {
        throw ShapeError("matmul: expected 2-D operands, got " + a.shape_str() + " and " + b.shape_str());
    }
    const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
    if (b.dim(0) != k) {
        throw ShapeError("matmul: inner dimensions disagree: " + a.shape_str() + " vs " + b.shape_str());
    }
    Tensor c({m, n});
    const double* pa = a.data();
    const double* pb = b.data();
    double* pc = c.data();
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = pa[i * k + p];
            const double* brow = pb + p * n;
            double* crow = pc + i * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
        }
    }
    check_finite(c, "matmul");
    return c;
}

/// a^T * b without materializing the transpose: [k x m]^T is passed as
/// a [k x m] tensor `a`, result is [m x n].
inline Tensor matmul_transA(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2 || a.dim(0) != b.dim(0)) {
        throw ShapeError("matmul_transA: bad shapes " + a.shape_str() + ", " + b.shape_str());
    }
    const std::size_t k = a.dim(0), m = a.dim(1), n = b.dim(1);
    Tensor c({m, n});
    const double* pa = a.data();
    const double* pb = b.data();
    double* pc = c.data();
    for (std::size_t p = 0; p < k; ++p) {
        const double* arow = pa + p * m;
        const double* brow = pb + p * n;
        for (std::size_t i = 0; i < m; ++i) {
            const double aip = arow[i];
            double* crow = pc + i * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
        }
    }
    check_finite(c, "matmul_transA");
    return c;
}

/// a * b^T: [m x k] * ([n x k])^T -> [m x n].
inline Tensor matmul_transB(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(1)) {
        throw ShapeError("matmul_transB: bad shapes " + a.shape_str() + ", " + b.shape_str());
    }
    const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(0);
    Tensor c({m, n});
    const double* pa = a.data();
    const double* pb = b.data();
    double* pc = c.data();
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = pa + i * k;
        for (std::size_t j = 0; j < n; ++j) {
            const double* brow = pb + j * k;
            double s = 0.0;
            for (std::size_t p = 0; p < k; ++p) s += arow[p] * brow[p];
            pc[i * n + j] = s;
        }
    }
    check_finite(c, "matmul_transB");
    return c;
}

/// Sum of all elements in ascending flat-index order; empty tensor sums to 0.
inline double reduce_sum(const Tensor& t) {
    double s = 0.0;
    const double* p = t.data();
    for (std::size_t i = 0; i < t.size(); ++i) s += p[i];
    if (!std::isfinite(s)) throw NumericError("reduce_sum: non-finite result");
    return s;
}

inline Tensor operator+(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) throw ShapeError("tensor +: shape mismatch");
    Tensor c = a;
    for (std::size_t i = 0; i < c.size(); ++i) c[i] += b[i];
    return c;
}

inline Tensor operator-(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) throw ShapeError("tensor -: shape mismatch");
    Tensor c = a;
    for (std::size_t i = 0; i < c.size(); ++i) c[i] -= b[i];
    return c;
}

/// Elementwise (Hadamard) product.
inline Tensor hadamard(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) throw ShapeError("hadamard: shape mismatch");
    Tensor c = a;
    for (std::size_t i = 0; i < c.size(); ++i) c[i] *= b[i];
    return c;
}

inline Tensor scaled(const Tensor& a, double s) {
    Tensor c = a;
    for (std::size_t i = 0; i < c.size(); ++i) c[i] *= s;
    return c;
}

/// y += alpha * x, in place.
inline void axpy(double alpha, const Tensor& x, Tensor& y) {
    if (!x.same_shape(y)) throw ShapeError("axpy: shape mismatch");
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
}

/// Add a length-n row vector to every row of an [m x n] matrix.
inline Tensor add_row_vector(const Tensor& m, const Tensor& v) {
    if (m.rank() != 2 || v.rank() != 1 || v.dim(0) != m.dim(1)) {
        throw ShapeError("add_row_vector: shapes " + m.shape_str() + ", " + v.shape_str());
    }
    Tensor c = m;
    for (std::size_t i = 0; i < m.dim(0); ++i)
        for (std::size_t j = 0; j < m.dim(1); ++j) c.at(i, j) += v[j];
    return c;
}

/// Column sums of an [m x n] matrix -> length-n vector.
inline Tensor col_sum(const Tensor& m) {
    if (m.rank() != 2) throw ShapeError("col_sum: expected 2-D, got " + m.shape_str());
    Tensor v({m.dim(1)});
    for (std::size_t i = 0; i < m.dim(0); ++i)
        for (std::size_t j = 0; j < m.dim(1); ++j) v[j] += m.at(i, j);
    return v;
}

/// 2-D transpose.
inline Tensor transpose(const Tensor& m) {
    if (m.rank() != 2) throw ShapeError("transpose: expected 2-D, got " + m.shape_str());
    Tensor t({m.dim(1), m.dim(0)});
    for (std::size_t i = 0; i < m.dim(0); ++i)
        for (std::size_t j = 0; j < m.dim(1); ++j) t.at(j, i) = m.at(i, j);
    return t;
}

/// Swap axes 1 and 2 of a [b x r x c] tensor -> [b x c x r].
inline Tensor swap_axes_12(const Tensor& t) {
    if (t.rank() != 3) throw ShapeError("swap_axes_12: expected 3-D, got " + t.shape_str());
    Tensor out({t.dim(0), t.dim(2), t.dim(1)});
    for (std::size_t b = 0; b < t.dim(0); ++b)
        for (std::size_t i = 0; i < t.dim(1); ++i)
            for (std::size_t j = 0; j < t.dim(2); ++j) out.at(b, j, i) = t.at(b, i, j);
    return out;
}

/// Extract step t of a [batch x steps x f] tensor -> [batch x f].
inline Tensor step_slice(const Tensor& xs, std::size_t t) {
    if (xs.rank() != 3) throw ShapeError("step_slice: expected 3-D, got " + xs.shape_str());
    if (t >= xs.dim(1)) throw ShapeError("step_slice: step out of range");
    Tensor out({xs.dim(0), xs.dim(2)});
    for (std::size_t b = 0; b < xs.dim(0); ++b)
        for (std::size_t j = 0; j < xs.dim(2); ++j) out.at(b, j) = xs.at(b, t, j);
    return out;
}

/// Write a [batch x f] slab into step t of a [batch x steps x f] tensor.
inline void set_step_slice(Tensor& xs, std::size_t t, const Tensor& slab) {
    if (xs.rank() != 3 || slab.rank() != 2 || slab.dim(0) != xs.dim(0) || slab.dim(1) != xs.dim(2)) {
        throw ShapeError("set_step_slice: shapes " + xs.shape_str() + ", " + slab.shape_str());
    }
    for (std::size_t b = 0; b < xs.dim(0); ++b)
        for (std::size_t j = 0; j < xs.dim(2); ++j) xs.at(b, t, j) = slab.at(b, j);
}

} // namespace deepts
