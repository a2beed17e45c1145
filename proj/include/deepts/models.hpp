#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "deepts/errors.hpp"
#include "deepts/layers.hpp"
#include "deepts/params.hpp"
#include "deepts/rng.hpp"
#include "deepts/tensor.hpp"

namespace deepts {

/// The seven benchmarked architectures.
enum class ModelKind { RnnLstm, StackedLstm, Cnn, CnnLstm, Dnn, TdMlp, Autoencoder };

inline constexpr std::array<ModelKind, 7> kAllModelKinds = {
    ModelKind::RnnLstm, ModelKind::StackedLstm, ModelKind::Cnn,    ModelKind::CnnLstm,
    ModelKind::Dnn,     ModelKind::TdMlp,       ModelKind::Autoencoder};

inline std::string model_kind_id(ModelKind k) {
    switch (k) {
        case ModelKind::RnnLstm: return "rnn-lstm";
        case ModelKind::StackedLstm: return "stacked-lstm";
        case ModelKind::Cnn: return "cnn";
        case ModelKind::CnnLstm: return "cnn-lstm";
        case ModelKind::Dnn: return "dnn";
        case ModelKind::TdMlp: return "td-mlp";
        case ModelKind::Autoencoder: return "ae";
    }
    throw ValueError("model_kind_id: bad kind");
}

/// Row label as printed in report tables.
inline std::string model_kind_label(ModelKind k) {
    switch (k) {
        case ModelKind::RnnLstm: return "RNN-LSTM";
        case ModelKind::StackedLstm: return "Stacked-LSTM";
        case ModelKind::Cnn: return "CNN";
        case ModelKind::CnnLstm: return "CNN-LSTM";
        case ModelKind::Dnn: return "DNN";
        case ModelKind::TdMlp: return "TD-MLP";
        case ModelKind::Autoencoder: return "AE";
    }
    throw ValueError("model_kind_label: bad kind");
}

inline ModelKind parse_model_kind(const std::string& id) {
    for (ModelKind k : kAllModelKinds) {
        if (model_kind_id(k) == id) return k;
    }
    throw ValueError("unknown model kind: " + id);
}

/// Architecture hyperparameters. The hidden-size list is interpreted per
/// kind (LSTM widths, DNN stage widths, encoder widths, ...); an empty list
/// selects the per-kind default.
struct ModelSpec {
    ModelKind kind = ModelKind::Dnn;
    std::size_t lookback = 24;
    std::size_t features = 1;
    std::vector<std::size_t> hidden; // empty -> default per kind
    double dropout_rate = 0.0;
    double ae_beta = 0.5; // reconstruction weight, Autoencoder only
    std::size_t conv_filters = 32;
    std::size_t conv_width = 3;
    std::size_t conv_stride = 1;
    std::size_t pool_window = 2;
};

inline std::vector<std::size_t> default_hidden_sizes(ModelKind k) {
    switch (k) {
        case ModelKind::RnnLstm: return {64};
        case ModelKind::StackedLstm: return {64, 64};
        case ModelKind::Cnn: return {64};
        case ModelKind::CnnLstm: return {64};
        case ModelKind::Dnn: return {128, 64, 32};
        case ModelKind::TdMlp: return {32};
        case ModelKind::Autoencoder: return {64, 16};
    }
    throw ValueError("default_hidden_sizes: bad kind");
}

/// Caches from one Model::forward call; consumed by exactly one backward.
struct ModelCaches {
    CacheList body, head, decoder;
    bool consumed = false;
};

struct ForwardResult {
    Tensor prediction;                    // [batch x 1]
    std::optional<Tensor> reconstruction; // [batch x lookback*features], AE only
};

/// A built architecture: an ordered layer graph plus the ParamSet viewing
/// every parameter tensor. Construction is deterministic per (spec, seed).
/// Immutable during eval-mode forward; training requires exclusive access.
class Model {
public:
    static Model build(const ModelSpec& spec, SeededRng& rng) {
        Model m;
        m.spec_ = spec;
        if (m.spec_.hidden.empty()) m.spec_.hidden = default_hidden_sizes(spec.kind);
        for (std::size_t h : m.spec_.hidden) {
            if (h == 0) throw ValueError("Model::build: hidden sizes must be positive");
        }
        if (spec.lookback == 0 || spec.features == 0) {
            throw ValueError("Model::build: lookback and features must be positive");
        }
        m.construct(rng);
        m.register_all();
        return m;
    }

    const ModelSpec& spec() const { return spec_; }
    ParamSet& params() { return params_; }
    const ParamSet& params() const { return params_; }

    std::size_t param_count() const { return params_.scalar_count(); }

    bool has_reconstruction() const { return spec_.kind == ModelKind::Autoencoder; }

    /// Runs the graph. Prediction is [batch x 1]; the Autoencoder also
    /// returns its reconstruction of the flattened input window. Pass a
    /// ModelCaches to enable a subsequent backward call; eval-mode forward
    /// without caches is a pure function of (params, input).
    ForwardResult forward(const Tensor& x, Mode mode, SeededRng* rng,
                          ModelCaches* caches = nullptr) const {
        if (x.rank() != 3 || x.dim(1) != spec_.lookback || x.dim(2) != spec_.features) {
            throw ShapeError("Model::forward: input " + x.shape_str() + " does not match spec [" +
                             std::to_string(spec_.lookback) + " x " + std::to_string(spec_.features) + "]");
        }
        Tensor rep = run_chain(body_, x, mode, rng, caches != nullptr ? &caches->body : nullptr);
        Tensor pred = run_chain(head_, rep, mode, rng, caches != nullptr ? &caches->head : nullptr);
        ForwardResult out;
        out.prediction = std::move(pred);
        if (!decoder_.empty()) {
            out.reconstruction =
                run_chain(decoder_, rep, mode, rng, caches != nullptr ? &caches->decoder : nullptr);
        }
        return out;
    }

    /// Backpropagates dL/dprediction (and dL/dreconstruction for the
    /// Autoencoder), accumulating into the parameter gradients. Caches are
    /// single-use.
    void backward(ModelCaches& caches, const Tensor& d_prediction,
                  const Tensor* d_reconstruction = nullptr) {
        if (caches.consumed) throw CacheError("Model::backward: caches already consumed");
        caches.consumed = true;
        Tensor d_rep = run_chain_backward(head_, d_prediction, caches.head);
        if (!decoder_.empty()) {
            if (d_reconstruction == nullptr) {
                throw ValueError("Model::backward: autoencoder requires d_reconstruction");
            }
            Tensor d_rep2 = run_chain_backward(decoder_, *d_reconstruction, caches.decoder);
            d_rep = d_rep + d_rep2;
        }
        run_chain_backward(body_, d_rep, caches.body);
    }

private:
    static Tensor run_chain(const std::vector<std::unique_ptr<Layer>>& chain, Tensor x, Mode mode,
                            SeededRng* rng, CacheList* caches) {
        for (const auto& layer : chain) x = layer->forward(x, mode, rng, caches);
        return x;
    }

    static Tensor run_chain_backward(const std::vector<std::unique_ptr<Layer>>& chain, Tensor dy,
                                     CacheList& caches) {
        if (caches.size() != chain.size()) {
            throw CacheError("Model::backward: cache list does not match layer graph");
        }
        for (std::size_t i = chain.size(); i-- > 0;) {
            dy = chain[i]->backward(dy, *caches[i]);
        }
        return dy;
    }

    void add_dropout(std::vector<std::unique_ptr<Layer>>& chain) {
        if (spec_.dropout_rate > 0.0) {
            chain.push_back(std::make_unique<DropoutLayer>(spec_.dropout_rate));
        }
    }

    void construct(SeededRng& rng) {
        const std::size_t lb = spec_.lookback, nf = spec_.features;
        const auto& hid = spec_.hidden;
        std::uint64_t stream = 0;
        auto next_rng = [&]() { return rng.child(stream++); };

        switch (spec_.kind) {
            case ModelKind::RnnLstm: {
                auto r = next_rng();
                body_.push_back(std::make_unique<LstmLayer>(nf, hid[0], r));
                body_.push_back(std::make_unique<TakeLastStepLayer>());
                add_dropout(body_);
                auto r2 = next_rng();
                head_.push_back(std::make_unique<DenseLayer>(hid[0], 1, r2));
                break;
            }
            case ModelKind::StackedLstm: {
                std::size_t in = nf;
                for (std::size_t i = 0; i < hid.size(); ++i) {
                    auto r = next_rng();
                    body_.push_back(std::make_unique<LstmLayer>(in, hid[i], r));
                    if (i + 1 == hid.size()) body_.push_back(std::make_unique<TakeLastStepLayer>());
                    add_dropout(body_);
                    in = hid[i];
                }
                auto r2 = next_rng();
                head_.push_back(std::make_unique<DenseLayer>(in, 1, r2));
                break;
            }
            case ModelKind::Cnn: {
                body_.push_back(std::make_unique<SwapAxesLayer>()); // -> [B x F x L]
                auto r = next_rng();
                auto conv = std::make_unique<Conv1dLayer>(spec_.conv_filters, nf, spec_.conv_width,
                                                          spec_.conv_stride, r);
                const std::size_t conv_len = conv->out_length(lb);
                body_.push_back(std::move(conv));
                body_.push_back(std::make_unique<ActivationLayer>(Activation::Relu));
                auto pool = std::make_unique<MaxPool1dLayer>(spec_.pool_window);
                const std::size_t pooled = pool->out_length(conv_len);
                body_.push_back(std::move(pool));
                body_.push_back(std::make_unique<FlattenLayer>());
                auto r2 = next_rng();
                body_.push_back(
                    std::make_unique<DenseLayer>(spec_.conv_filters * pooled, hid[0], r2));
                body_.push_back(std::make_unique<ActivationLayer>(Activation::Relu));
                add_dropout(body_);
                auto r3 = next_rng();
                head_.push_back(std::make_unique<DenseLayer>(hid[0], 1, r3));
                break;
            }
            case ModelKind::CnnLstm: {
                body_.push_back(std::make_unique<SwapAxesLayer>());
                auto r = next_rng();
                auto conv = std::make_unique<Conv1dLayer>(spec_.conv_filters, nf, spec_.conv_width,
                                                          spec_.conv_stride, r);
                conv->out_length(lb); // validates lookback >= kernel width
                body_.push_back(std::move(conv));
                body_.push_back(std::make_unique<ActivationLayer>(Activation::Relu));
                body_.push_back(std::make_unique<SwapAxesLayer>()); // -> [B x outlen x filters]
                auto r2 = next_rng();
                body_.push_back(std::make_unique<LstmLayer>(spec_.conv_filters, hid[0], r2));
                body_.push_back(std::make_unique<TakeLastStepLayer>());
                add_dropout(body_);
                auto r3 = next_rng();
                head_.push_back(std::make_unique<DenseLayer>(hid[0], 1, r3));
                break;
            }
            case ModelKind::Dnn: {
                body_.push_back(std::make_unique<FlattenLayer>());
                std::size_t in = lb * nf;
                for (std::size_t h : hid) {
                    auto r = next_rng();
                    body_.push_back(std::make_unique<DenseLayer>(in, h, r));
                    body_.push_back(std::make_unique<ActivationLayer>(Activation::Relu));
                    add_dropout(body_);
                    in = h;
                }
                auto r2 = next_rng();
                head_.push_back(std::make_unique<DenseLayer>(in, 1, r2));
                break;
            }
            case ModelKind::TdMlp: {
                auto r = next_rng();
                body_.push_back(std::make_unique<TimeDistributedDenseLayer>(nf, hid[0], r));
                body_.push_back(std::make_unique<ActivationLayer>(Activation::Relu));
                add_dropout(body_);
                body_.push_back(std::make_unique<FlattenLayer>());
                auto r2 = next_rng();
                head_.push_back(std::make_unique<DenseLayer>(lb * hid[0], 1, r2));
                break;
            }
            case ModelKind::Autoencoder: {
                body_.push_back(std::make_unique<FlattenLayer>());
                std::size_t in = lb * nf;
                for (std::size_t h : hid) {
                    auto r = next_rng();
                    body_.push_back(std::make_unique<DenseLayer>(in, h, r));
                    body_.push_back(std::make_unique<ActivationLayer>(Activation::Relu));
                    add_dropout(body_);
                    in = h;
                }
                // prediction head from the latent code
                auto rh = next_rng();
                head_.push_back(std::make_unique<DenseLayer>(in, 1, rh));
                // decoder mirror back to the flattened window
                std::size_t din = in;
                for (std::size_t i = hid.size(); i-- > 1;) {
                    auto r = next_rng();
                    decoder_.push_back(std::make_unique<DenseLayer>(din, hid[i - 1], r));
                    decoder_.push_back(std::make_unique<ActivationLayer>(Activation::Relu));
                    add_dropout(decoder_);
                    din = hid[i - 1];
                }
                auto rd = next_rng();
                decoder_.push_back(std::make_unique<DenseLayer>(din, lb * nf, rd));
                break;
            }
        }
    }

    void register_all() {
        const char* groups[3] = {"body", "head", "dec"};
        const std::vector<std::unique_ptr<Layer>>* chains[3] = {&body_, &head_, &decoder_};
        for (int g = 0; g < 3; ++g) {
            std::size_t i = 0;
            for (const auto& layer : *chains[g]) {
                layer->register_params(params_, std::string(groups[g]) + std::to_string(i));
                ++i;
            }
        }
    }

    ModelSpec spec_;
    std::vector<std::unique_ptr<Layer>> body_, head_, decoder_;
    ParamSet params_;
};

} // namespace deepts
