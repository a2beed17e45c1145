#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "deepts/errors.hpp"
#include "deepts/numeric.hpp"
#include "deepts/params.hpp"
#include "deepts/rng.hpp"
#include "deepts/tensor.hpp"

namespace deepts {

enum class Mode { Train, Eval };

enum class Activation { Relu, Tanh, Sigmoid, Linear };

inline double sigmoid_scalar(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

/// Elementwise activation.
inline Tensor activation_forward(Activation kind, const Tensor& x) {
    Tensor y = x;
    switch (kind) {
        case Activation::Relu:
            for (std::size_t i = 0; i < y.size(); ++i) y[i] = y[i] > 0.0 ? y[i] : 0.0;
            break;
        case Activation::Tanh:
            for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::tanh(y[i]);
            break;
        case Activation::Sigmoid:
            for (std::size_t i = 0; i < y.size(); ++i) y[i] = sigmoid_scalar(y[i]);
            break;
        case Activation::Linear:
            break;
    }
    return y;
}

/// dL/dx given dL/dy and the forward input x.
inline Tensor activation_backward(Activation kind, const Tensor& x, const Tensor& dy) {
    if (!x.same_shape(dy)) throw ShapeError("activation_backward: shape mismatch");
    Tensor dx = dy;
    switch (kind) {
        case Activation::Relu:
            for (std::size_t i = 0; i < dx.size(); ++i) {
                if (!(x[i] > 0.0)) dx[i] = 0.0;
            }
            break;
        case Activation::Tanh:
            for (std::size_t i = 0; i < dx.size(); ++i) {
                const double t = std::tanh(x[i]);
                dx[i] *= 1.0 - t * t;
            }
            break;
        case Activation::Sigmoid:
            for (std::size_t i = 0; i < dx.size(); ++i) {
                const double s = sigmoid_scalar(x[i]);
                dx[i] *= s * (1.0 - s);
            }
            break;
        case Activation::Linear:
            break;
    }
    return dx;
}

/// Base of all forward caches. A cache is consumed by exactly one backward
/// call on the layer that produced it.
struct CacheBase {
    virtual ~CacheBase() = default;
    const void* owner = nullptr;
    bool consumed = false;
};

using CacheList = std::vector<std::unique_ptr<CacheBase>>;

/// Common interface for graph composition inside a Model. Typed entry points
/// remain public on each concrete layer so unit tests can drive them
/// directly.
class Layer {
public:
    virtual ~Layer() = default;

    /// Runs the layer; when `caches` is non-null a cache for the matching
    /// backward call is appended.
    virtual Tensor forward(const Tensor& x, Mode mode, SeededRng* rng, CacheList* caches) = 0;

    /// Consumes `cache`, accumulates parameter gradients into the layer's
    /// gradient tensors and returns dL/dinput.
    virtual Tensor backward(const Tensor& dy, CacheBase& cache) = 0;

    virtual void register_params(ParamSet&, const std::string& /*prefix*/) {}

protected:
    template <class C>
    C& claim(CacheBase& cache, const char* what) {
        auto* c = dynamic_cast<C*>(&cache);
        if (c == nullptr || cache.owner != this) {
            throw CacheError(std::string(what) + ": cache does not belong to this layer");
        }
        if (cache.consumed) throw CacheError(std::string(what) + ": cache already consumed");
        cache.consumed = true;
        return *c;
    }
};

// ---------------------------------------------------------------------------
// Dense
// ---------------------------------------------------------------------------

struct DenseCache : CacheBase {
    Tensor x; // [batch x in]
};

/// Fully connected layer: y = x W + b.
class DenseLayer : public Layer {
public:
    DenseLayer(std::size_t in, std::size_t out, SeededRng& rng)
        : w_(glorot_init({in, out}, rng)), b_({out}), dw_({in, out}), db_({out}) {}

    DenseLayer(Tensor w, Tensor b)
        : w_(std::move(w)), b_(std::move(b)), dw_(w_.shape()), db_(b_.shape()) {
        if (w_.rank() != 2 || b_.rank() != 1 || b_.dim(0) != w_.dim(1)) {
            throw ShapeError("DenseLayer: weights " + w_.shape_str() + " vs bias " + b_.shape_str());
        }
    }

    std::size_t in_dim() const { return w_.dim(0); }
    std::size_t out_dim() const { return w_.dim(1); }
    const Tensor& weights() const { return w_; }
    const Tensor& bias() const { return b_; }
    const Tensor& grad_weights() const { return dw_; }
    const Tensor& grad_bias() const { return db_; }

    Tensor forward(const Tensor& x, Mode, SeededRng*, CacheList* caches) override {
        if (x.rank() != 2 || x.dim(1) != w_.dim(0)) {
            throw ShapeError("DenseLayer::forward: input " + x.shape_str() + " for weights " + w_.shape_str());
        }
        Tensor y = add_row_vector(matmul(x, w_), b_);
        if (caches != nullptr) {
            auto c = std::make_unique<DenseCache>();
            c->owner = this;
            c->x = x;
            caches->push_back(std::move(c));
        }
        return y;
    }

    /// dW = x^T dY, db = colsum(dY), dX = dY W^T. Gradients accumulate.
    Tensor backward(const Tensor& dy, CacheBase& cache) override {
        auto& c = claim<DenseCache>(cache, "DenseLayer::backward");
        if (dy.rank() != 2 || dy.dim(0) != c.x.dim(0) || dy.dim(1) != w_.dim(1)) {
            throw ShapeError("DenseLayer::backward: dY " + dy.shape_str());
        }
        axpy(1.0, matmul_transA(c.x, dy), dw_);
        axpy(1.0, col_sum(dy), db_);
        return matmul_transB(dy, w_);
    }

    void register_params(ParamSet& ps, const std::string& prefix) override {
        ps.add(prefix + ".w", &w_, &dw_, true);
        ps.add(prefix + ".b", &b_, &db_, false);
    }

private:
    Tensor w_, b_;
    Tensor dw_, db_;
};

// ---------------------------------------------------------------------------
// 1-D convolution
// ---------------------------------------------------------------------------

struct Conv1dCache : CacheBase {
    Tensor x; // [batch x channels x length]
};

/// Valid (no padding) cross-correlation along the last axis.
/// Input [batch x channels x length], kernels [filters x channels x width],
/// output [batch x filters x outlen] with outlen = floor((len-width)/stride)+1.
class Conv1dLayer : public Layer {
public:
    Conv1dLayer(std::size_t filters, std::size_t channels, std::size_t width,
                std::size_t stride, SeededRng& rng)
        : kernels_(glorot_init({filters, channels, width}, rng)),
          bias_({filters}),
          dk_({filters, channels, width}),
          db_({filters}),
          stride_(stride) {
        if (stride_ < 1) throw ValueError("Conv1dLayer: stride must be >= 1");
    }

    Conv1dLayer(Tensor kernels, Tensor bias, std::size_t stride)
        : kernels_(std::move(kernels)), bias_(std::move(bias)),
          dk_(kernels_.shape()), db_(bias_.shape()), stride_(stride) {
        if (kernels_.rank() != 3 || bias_.rank() != 1 || bias_.dim(0) != kernels_.dim(0)) {
            throw ShapeError("Conv1dLayer: kernels " + kernels_.shape_str() + " vs bias " + bias_.shape_str());
        }
        if (stride_ < 1) throw ValueError("Conv1dLayer: stride must be >= 1");
    }

    std::size_t filters() const { return kernels_.dim(0); }
    std::size_t channels() const { return kernels_.dim(1); }
    std::size_t width() const { return kernels_.dim(2); }
    std::size_t stride() const { return stride_; }
    const Tensor& kernels() const { return kernels_; }
    const Tensor& bias() const { return bias_; }
    const Tensor& grad_kernels() const { return dk_; }
    const Tensor& grad_bias() const { return db_; }

    std::size_t out_length(std::size_t in_length) const {
        if (in_length < width()) {
            throw ShapeError("Conv1dLayer: input length " + std::to_string(in_length) +
                             " shorter than kernel width " + std::to_string(width()));
        }
        return (in_length - width()) / stride_ + 1;
    }

    Tensor forward(const Tensor& x, Mode, SeededRng*, CacheList* caches) override {
        if (x.rank() != 3 || x.dim(1) != channels()) {
            throw ShapeError("Conv1dLayer::forward: input " + x.shape_str());
        }
        const std::size_t batch = x.dim(0), len = x.dim(2);
        const std::size_t outlen = out_length(len);
        const std::size_t f = filters(), ch = channels(), w = width();
        Tensor y({batch, f, outlen});
        for (std::size_t b = 0; b < batch; ++b) {
            for (std::size_t fi = 0; fi < f; ++fi) {
                for (std::size_t o = 0; o < outlen; ++o) {
                    double s = bias_[fi];
                    const std::size_t start = o * stride_;
                    for (std::size_t c = 0; c < ch; ++c) {
                        for (std::size_t k = 0; k < w; ++k) {
                            s += kernels_.at(fi, c, k) * x.at(b, c, start + k);
                        }
                    }
                    y.at(b, fi, o) = s;
                }
            }
        }
        check_finite(y, "Conv1dLayer::forward");
        if (caches != nullptr) {
            auto c = std::make_unique<Conv1dCache>();
            c->owner = this;
            c->x = x;
            caches->push_back(std::move(c));
        }
        return y;
    }

    Tensor backward(const Tensor& dy, CacheBase& cache) override {
        auto& c = claim<Conv1dCache>(cache, "Conv1dLayer::backward");
        const Tensor& x = c.x;
        const std::size_t batch = x.dim(0), len = x.dim(2);
        const std::size_t outlen = out_length(len);
        const std::size_t f = filters(), ch = channels(), w = width();
        if (dy.rank() != 3 || dy.dim(0) != batch || dy.dim(1) != f || dy.dim(2) != outlen) {
            throw ShapeError("Conv1dLayer::backward: dY " + dy.shape_str());
        }
        Tensor dx({batch, ch, len});
        for (std::size_t b = 0; b < batch; ++b) {
            for (std::size_t fi = 0; fi < f; ++fi) {
                for (std::size_t o = 0; o < outlen; ++o) {
                    const double g = dy.at(b, fi, o);
                    db_[fi] += g;
                    const std::size_t start = o * stride_;
                    for (std::size_t cc = 0; cc < ch; ++cc) {
                        for (std::size_t k = 0; k < w; ++k) {
                            dk_.at(fi, cc, k) += g * x.at(b, cc, start + k);
                            dx.at(b, cc, start + k) += g * kernels_.at(fi, cc, k);
                        }
                    }
                }
            }
        }
        return dx;
    }

    void register_params(ParamSet& ps, const std::string& prefix) override {
        ps.add(prefix + ".k", &kernels_, &dk_, true);
        ps.add(prefix + ".b", &bias_, &db_, false);
    }

private:
    Tensor kernels_, bias_;
    Tensor dk_, db_;
    std::size_t stride_;
};

// ---------------------------------------------------------------------------
// LSTM
// ---------------------------------------------------------------------------

struct LstmCache : CacheBase {
    Tensor xs;                     // [batch x steps x in]
    Tensor h0, c0;                 // [batch x hidden]
    Tensor is, fs, os, gs, cs, hs; // [batch x steps x hidden]
};

/// Single LSTM layer with the standard forget-gate formulation:
///   i = sigmoid(x W_i + h U_i + b_i)      f = sigmoid(x W_f + h U_f + b_f)
///   o = sigmoid(x W_o + h U_o + b_o)      g = tanh   (x W_g + h U_g + b_g)
///   c <- f .* c + i .* g                  h <- o .* tanh(c)
/// Outputs the full hidden sequence [batch x steps x hidden].
class LstmLayer : public Layer {
public:
    LstmLayer(std::size_t in, std::size_t hidden, SeededRng& rng) {
        for (int g = 0; g < 4; ++g) {
            auto sub = rng.child(0x4c53544dULL + static_cast<std::uint64_t>(g));
            w_[g] = glorot_init({in, hidden}, sub);
            auto subu = rng.child(0x4c53554dULL + static_cast<std::uint64_t>(g));
            u_[g] = glorot_init({hidden, hidden}, subu);
            b_[g] = Tensor({hidden});
            dw_[g] = Tensor({in, hidden});
            du_[g] = Tensor({hidden, hidden});
            db_[g] = Tensor({hidden});
        }
    }

    std::size_t in_dim() const { return w_[0].dim(0); }
    std::size_t hidden_dim() const { return w_[0].dim(1); }

    // gate order: i, f, o, g
    Tensor& input_weights(int gate) { return w_[gate]; }
    Tensor& recurrent_weights(int gate) { return u_[gate]; }
    Tensor& gate_bias(int gate) { return b_[gate]; }
    const Tensor& grad_input_weights(int gate) const { return dw_[gate]; }

    /// Full typed forward from explicit initial state.
    std::pair<Tensor, std::unique_ptr<LstmCache>> run(const Tensor& xs, const Tensor& h0,
                                                      const Tensor& c0) {
        if (xs.rank() != 3 || xs.dim(2) != in_dim()) {
            throw ShapeError("LstmLayer: input " + xs.shape_str() + " for in dim " +
                             std::to_string(in_dim()));
        }
        const std::size_t batch = xs.dim(0), steps = xs.dim(1), hid = hidden_dim();
        if (steps == 0) throw ShapeError("LstmLayer: zero-length step axis");
        if (h0.rank() != 2 || h0.dim(0) != batch || h0.dim(1) != hid || !h0.same_shape(c0)) {
            throw ShapeError("LstmLayer: initial state shapes");
        }
        auto cache = std::make_unique<LstmCache>();
        cache->owner = this;
        cache->xs = xs;
        cache->h0 = h0;
        cache->c0 = c0;
        for (Tensor* t : {&cache->is, &cache->fs, &cache->os, &cache->gs, &cache->cs, &cache->hs}) {
            *t = Tensor({batch, steps, hid});
        }
        Tensor h = h0, c = c0;
        for (std::size_t t = 0; t < steps; ++t) {
            const Tensor xt = step_slice(xs, t);
            Tensor ai = add_row_vector(matmul(xt, w_[0]) + matmul(h, u_[0]), b_[0]);
            Tensor af = add_row_vector(matmul(xt, w_[1]) + matmul(h, u_[1]), b_[1]);
            Tensor ao = add_row_vector(matmul(xt, w_[2]) + matmul(h, u_[2]), b_[2]);
            Tensor ag = add_row_vector(matmul(xt, w_[3]) + matmul(h, u_[3]), b_[3]);
            Tensor it = activation_forward(Activation::Sigmoid, ai);
            Tensor ft = activation_forward(Activation::Sigmoid, af);
            Tensor ot = activation_forward(Activation::Sigmoid, ao);
            Tensor gt = activation_forward(Activation::Tanh, ag);
            Tensor ct = hadamard(ft, c) + hadamard(it, gt);
            Tensor ht = hadamard(ot, activation_forward(Activation::Tanh, ct));
            set_step_slice(cache->is, t, it);
            set_step_slice(cache->fs, t, ft);
            set_step_slice(cache->os, t, ot);
            set_step_slice(cache->gs, t, gt);
            set_step_slice(cache->cs, t, ct);
            set_step_slice(cache->hs, t, ht);
            h = ht;
            c = ct;
        }
        return {cache->hs, std::move(cache)};
    }

    Tensor forward(const Tensor& xs, Mode, SeededRng*, CacheList* caches) override {
        const std::size_t batch = xs.rank() == 3 ? xs.dim(0) : 0;
        Tensor h0({batch, hidden_dim()});
        Tensor c0({batch, hidden_dim()});
        auto [hs, cache] = run(xs, h0, c0);
        if (caches != nullptr) caches->push_back(std::move(cache));
        return hs;
    }

    /// Backpropagation through time over all steps. dHs carries dL/dh_t for
    /// every step (zeros where the loss does not touch a step).
    Tensor backward(const Tensor& dhs, CacheBase& cache) override {
        auto& c = claim<LstmCache>(cache, "LstmLayer::backward");
        const std::size_t batch = c.xs.dim(0), steps = c.xs.dim(1), hid = hidden_dim();
        if (!dhs.same_shape(c.hs)) {
            throw ShapeError("LstmLayer::backward: dHs " + dhs.shape_str());
        }
        Tensor dxs(c.xs.shape());
        Tensor dh_next({batch, hid});
        Tensor dc_next({batch, hid});
        for (std::size_t ts = steps; ts-- > 0;) {
            const Tensor it = step_slice(c.is, ts);
            const Tensor ft = step_slice(c.fs, ts);
            const Tensor ot = step_slice(c.os, ts);
            const Tensor gt = step_slice(c.gs, ts);
            const Tensor ct = step_slice(c.cs, ts);
            const Tensor c_prev = ts > 0 ? step_slice(c.cs, ts - 1) : c.c0;
            const Tensor h_prev = ts > 0 ? step_slice(c.hs, ts - 1) : c.h0;
            const Tensor xt = step_slice(c.xs, ts);

            Tensor dh = step_slice(dhs, ts) + dh_next;
            Tensor tanh_c = activation_forward(Activation::Tanh, ct);

            // gate pre-activation gradients
            Tensor da_o = hadamard(dh, tanh_c);
            for (std::size_t i = 0; i < da_o.size(); ++i) da_o[i] *= ot[i] * (1.0 - ot[i]);

            Tensor dc = hadamard(dh, ot);
            for (std::size_t i = 0; i < dc.size(); ++i) dc[i] *= 1.0 - tanh_c[i] * tanh_c[i];
            dc = dc + dc_next;

            Tensor da_f = hadamard(dc, c_prev);
            for (std::size_t i = 0; i < da_f.size(); ++i) da_f[i] *= ft[i] * (1.0 - ft[i]);
            Tensor da_i = hadamard(dc, gt);
            for (std::size_t i = 0; i < da_i.size(); ++i) da_i[i] *= it[i] * (1.0 - it[i]);
            Tensor da_g = hadamard(dc, it);
            for (std::size_t i = 0; i < da_g.size(); ++i) da_g[i] *= 1.0 - gt[i] * gt[i];

            const Tensor* das[4] = {&da_i, &da_f, &da_o, &da_g};
            Tensor dxt({batch, in_dim()});
            Tensor dhp({batch, hid});
            for (int g = 0; g < 4; ++g) {
                axpy(1.0, matmul_transA(xt, *das[g]), dw_[g]);
                axpy(1.0, matmul_transA(h_prev, *das[g]), du_[g]);
                axpy(1.0, col_sum(*das[g]), db_[g]);
                dxt = dxt + matmul_transB(*das[g], w_[g]);
                dhp = dhp + matmul_transB(*das[g], u_[g]);
            }
            set_step_slice(dxs, ts, dxt);
            dh_next = dhp;
            dc_next = hadamard(dc, ft);
        }
        return dxs;
    }

    void register_params(ParamSet& ps, const std::string& prefix) override {
        static const char* gate_names[4] = {"i", "f", "o", "g"};
        for (int g = 0; g < 4; ++g) {
            ps.add(prefix + ".w_" + gate_names[g], &w_[g], &dw_[g], true);
            ps.add(prefix + ".u_" + gate_names[g], &u_[g], &du_[g], true);
            ps.add(prefix + ".b_" + gate_names[g], &b_[g], &db_[g], false);
        }
    }

private:
    Tensor w_[4], u_[4], b_[4];
    Tensor dw_[4], du_[4], db_[4];
};

// ---------------------------------------------------------------------------
// Dropout
// ---------------------------------------------------------------------------

struct DropoutCache : CacheBase {
    Tensor mask; // 0 or 1/(1-rate); empty when the layer acted as identity
};

/// Inverted dropout: each element kept with probability (1-rate) and scaled
/// by 1/(1-rate) during training. Eval mode is exactly the identity map and
/// consumes no randomness.
class DropoutLayer : public Layer {
public:
    explicit DropoutLayer(double rate) : rate_(rate) {
        if (!(rate >= 0.0) || rate >= 1.0) {
            throw ValueError("DropoutLayer: rate must lie in [0, 1)");
        }
    }

    double rate() const { return rate_; }

    Tensor forward(const Tensor& x, Mode mode, SeededRng* rng, CacheList* caches) override {
        Tensor y = x;
        Tensor mask;
        if (mode == Mode::Train && rate_ > 0.0) {
            if (rng == nullptr) throw ValueError("DropoutLayer: rng required in train mode");
            const double keep = 1.0 - rate_;
            const double scale = 1.0 / keep;
            mask = Tensor(x.shape());
            for (std::size_t i = 0; i < x.size(); ++i) {
                mask[i] = rng->uniform() < keep ? scale : 0.0;
                y[i] = x[i] * mask[i];
            }
        }
        if (caches != nullptr) {
            auto c = std::make_unique<DropoutCache>();
            c->owner = this;
            c->mask = std::move(mask);
            caches->push_back(std::move(c));
        }
        return y;
    }

    Tensor backward(const Tensor& dy, CacheBase& cache) override {
        auto& c = claim<DropoutCache>(cache, "DropoutLayer::backward");
        if (c.mask.size() == 0) return dy; // identity pass
        return hadamard(dy, c.mask);
    }

private:
    double rate_;
};

// ---------------------------------------------------------------------------
// Max pooling
// ---------------------------------------------------------------------------

struct MaxPool1dCache : CacheBase {
    std::vector<std::size_t> argmax; // flat source index per output element
    std::vector<std::size_t> in_shape;
};

/// Non-overlapping max over windows along the last axis of
/// [batch x channels x length]. A trailing remainder shorter than the window
/// is truncated. Gradient routes to the argmax, first index on ties.
class MaxPool1dLayer : public Layer {
public:
    explicit MaxPool1dLayer(std::size_t window) : window_(window) {
        if (window_ < 1) throw ValueError("MaxPool1dLayer: window must be >= 1");
    }

    std::size_t window() const { return window_; }

    std::size_t out_length(std::size_t in_length) const {
        const std::size_t n = in_length / window_;
        if (n == 0) {
            throw ShapeError("MaxPool1dLayer: input length " + std::to_string(in_length) +
                             " shorter than window " + std::to_string(window_));
        }
        return n;
    }

    Tensor forward(const Tensor& x, Mode, SeededRng*, CacheList* caches) override {
        if (x.rank() != 3) throw ShapeError("MaxPool1dLayer: input " + x.shape_str());
        const std::size_t batch = x.dim(0), ch = x.dim(1), len = x.dim(2);
        const std::size_t outlen = out_length(len);
        Tensor y({batch, ch, outlen});
        auto cache = std::make_unique<MaxPool1dCache>();
        cache->owner = this;
        cache->in_shape = x.shape();
        cache->argmax.resize(batch * ch * outlen);
        std::size_t oi = 0;
        for (std::size_t b = 0; b < batch; ++b) {
            for (std::size_t c = 0; c < ch; ++c) {
                for (std::size_t o = 0; o < outlen; ++o, ++oi) {
                    const std::size_t start = o * window_;
                    double best = x.at(b, c, start);
                    std::size_t best_k = start;
                    for (std::size_t k = 1; k < window_; ++k) {
                        const double v = x.at(b, c, start + k);
                        if (v > best) { // strict: ties keep the first index
                            best = v;
                            best_k = start + k;
                        }
                    }
                    y.at(b, c, o) = best;
                    cache->argmax[oi] = (b * ch + c) * len + best_k;
                }
            }
        }
        if (caches != nullptr) caches->push_back(std::move(cache));
        return y;
    }

    Tensor backward(const Tensor& dy, CacheBase& cache) override {
        auto& c = claim<MaxPool1dCache>(cache, "MaxPool1dLayer::backward");
        Tensor dx(c.in_shape);
        if (dy.size() != c.argmax.size()) throw ShapeError("MaxPool1dLayer::backward: dY size");
        for (std::size_t i = 0; i < dy.size(); ++i) dx[c.argmax[i]] += dy[i];
        return dx;
    }

private:
    std::size_t window_;
};

// ---------------------------------------------------------------------------
// Shape plumbing and small glue layers
// ---------------------------------------------------------------------------

struct ShapeCache : CacheBase {
    std::vector<std::size_t> in_shape;
};

/// [batch x ...] -> [batch x prod(rest)].
class FlattenLayer : public Layer {
public:
    Tensor forward(const Tensor& x, Mode, SeededRng*, CacheList* caches) override {
        if (x.rank() < 2) throw ShapeError("FlattenLayer: input " + x.shape_str());
        std::size_t rest = 1;
        for (std::size_t i = 1; i < x.rank(); ++i) rest *= x.dim(i);
        if (caches != nullptr) {
            auto c = std::make_unique<ShapeCache>();
            c->owner = this;
            c->in_shape = x.shape();
            caches->push_back(std::move(c));
        }
        return x.reshaped({x.dim(0), rest});
    }

    Tensor backward(const Tensor& dy, CacheBase& cache) override {
        auto& c = claim<ShapeCache>(cache, "FlattenLayer::backward");
        return dy.reshaped(c.in_shape);
    }
};

/// [batch x r x c] -> [batch x c x r]; used to move between
/// (steps, features) and (channels, length) layouts.
class SwapAxesLayer : public Layer {
public:
    Tensor forward(const Tensor& x, Mode, SeededRng*, CacheList* caches) override {
        Tensor y = swap_axes_12(x);
        if (caches != nullptr) {
            auto c = std::make_unique<ShapeCache>();
            c->owner = this;
            c->in_shape = x.shape();
            caches->push_back(std::move(c));
        }
        return y;
    }

    Tensor backward(const Tensor& dy, CacheBase& cache) override {
        claim<ShapeCache>(cache, "SwapAxesLayer::backward");
        return swap_axes_12(dy);
    }
};

/// [batch x steps x h] -> [batch x h], keeping the final step.
class TakeLastStepLayer : public Layer {
public:
    Tensor forward(const Tensor& x, Mode, SeededRng*, CacheList* caches) override {
        if (x.rank() != 3) throw ShapeError("TakeLastStepLayer: input " + x.shape_str());
        if (caches != nullptr) {
            auto c = std::make_unique<ShapeCache>();
            c->owner = this;
            c->in_shape = x.shape();
            caches->push_back(std::move(c));
        }
        return step_slice(x, x.dim(1) - 1);
    }

    Tensor backward(const Tensor& dy, CacheBase& cache) override {
        auto& c = claim<ShapeCache>(cache, "TakeLastStepLayer::backward");
        Tensor dx(c.in_shape);
        set_step_slice(dx, c.in_shape[1] - 1, dy);
        return dx;
    }
};

/// Elementwise activation as a graph node.
class ActivationLayer : public Layer {
public:
    explicit ActivationLayer(Activation kind) : kind_(kind) {}

    Activation kind() const { return kind_; }

    Tensor forward(const Tensor& x, Mode, SeededRng*, CacheList* caches) override {
        if (caches != nullptr) {
            auto c = std::make_unique<ActCache>();
            c->owner = this;
            c->x = x;
            caches->push_back(std::move(c));
        }
        return activation_forward(kind_, x);
    }

    Tensor backward(const Tensor& dy, CacheBase& cache) override {
        auto& c = claim<ActCache>(cache, "ActivationLayer::backward");
        return activation_backward(kind_, c.x, dy);
    }

private:
    struct ActCache : CacheBase {
        Tensor x;
    };
    Activation kind_;
};

/// The same dense layer applied independently to every timestep of a
/// [batch x steps x in] sequence; parameters are one shared tensor, not
/// per-step copies.
class TimeDistributedDenseLayer : public Layer {
public:
    TimeDistributedDenseLayer(std::size_t in, std::size_t out, SeededRng& rng)
        : inner_(in, out, rng) {}

    DenseLayer& inner() { return inner_; }

    Tensor forward(const Tensor& x, Mode mode, SeededRng* rng, CacheList* caches) override {
        if (x.rank() != 3) throw ShapeError("TimeDistributedDenseLayer: input " + x.shape_str());
        const std::size_t batch = x.dim(0), steps = x.dim(1);
        Tensor flat = x.reshaped({batch * steps, x.dim(2)});
        CacheList inner_caches;
        Tensor y = inner_.forward(flat, mode, rng, caches != nullptr ? &inner_caches : nullptr);
        if (caches != nullptr) {
            auto c = std::make_unique<TdCache>();
            c->owner = this;
            c->batch = batch;
            c->steps = steps;
            c->inner_cache = std::move(inner_caches.front());
            caches->push_back(std::move(c));
        }
        return y.reshaped({batch, steps, inner_.out_dim()});
    }

    Tensor backward(const Tensor& dy, CacheBase& cache) override {
        auto& c = claim<TdCache>(cache, "TimeDistributedDenseLayer::backward");
        Tensor flat_dy = dy.reshaped({c.batch * c.steps, inner_.out_dim()});
        Tensor dx = inner_.backward(flat_dy, *c.inner_cache);
        return dx.reshaped({c.batch, c.steps, inner_.in_dim()});
    }

    void register_params(ParamSet& ps, const std::string& prefix) override {
        inner_.register_params(ps, prefix);
    }

private:
    struct TdCache : CacheBase {
        std::size_t batch = 0, steps = 0;
        std::unique_ptr<CacheBase> inner_cache;
    };
    DenseLayer inner_;
};

} // namespace deepts
