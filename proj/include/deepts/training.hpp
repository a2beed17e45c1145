#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "deepts/data.hpp"
#include "deepts/errors.hpp"
#include "deepts/metrics.hpp"
#include "deepts/models.hpp"
#include "deepts/regularization.hpp"
#include "deepts/rng.hpp"

namespace deepts {

struct EpochRecord;

enum class TrainLoss { Mse, Huber };

/// Wall timing records real elapsed seconds; fixed timing records a
/// deterministic positive proxy (1 ms per mini-batch) so that complete
/// output files can be compared byte-for-byte across runs and worker counts.
enum class TimingMode { Wall, Fixed };

struct TrainConfig {
    int max_epochs = 200;
    std::size_t batch_size = 32;
    double learning_rate = 1e-3;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    std::uint64_t seed = 42;
    TrainLoss loss = TrainLoss::Mse;
    double huber_delta = 1.0;
    TimingMode timing = TimingMode::Wall;

    /// Early-stopping monitor; defaults to validation MSE when unset.
    std::function<double(const EpochRecord&)> monitor;
    /// Observation hook, called after every recorded epoch.
    std::function<void(const EpochRecord&)> on_epoch_end;

    void validate() const {
        if (max_epochs < 1) throw ValueError("TrainConfig: max_epochs must be positive");
        if (batch_size < 1) throw ValueError("TrainConfig: batch_size must be positive");
        if (!(learning_rate > 0.0)) throw ValueError("TrainConfig: learning_rate must be positive");
        if (!(adam_beta1 > 0.0 && adam_beta1 < 1.0) || !(adam_beta2 > 0.0 && adam_beta2 < 1.0)) {
            throw ValueError("TrainConfig: betas must lie in (0, 1)");
        }
        if (!(adam_epsilon > 0.0)) throw ValueError("TrainConfig: epsilon must be positive");
        if (!(huber_delta > 0.0)) throw ValueError("TrainConfig: huber_delta must be positive");
    }
};

/// Adaptive-moment estimation state: first/second moment per parameter plus
/// the shared step counter.
class OptimizerState {
public:
    explicit OptimizerState(const ParamSet& params) {
        m_.reserve(params.size());
        v_.reserve(params.size());
        for (const auto& e : params.entries()) {
            m_.emplace_back(e.value->shape());
            v_.emplace_back(e.value->shape());
        }
    }

    long step() const { return step_; }
    const Tensor& first_moment(std::size_t i) const { return m_.at(i); }
    const Tensor& second_moment(std::size_t i) const { return v_.at(i); }

    /// One bias-corrected update from the gradients currently held in
    /// `params`. Gradients must be finite.
    void adam_step(ParamSet& params, const TrainConfig& cfg) {
        if (params.size() != m_.size()) throw ValueError("adam_step: state does not match params");
        ++step_;
        const double b1 = cfg.adam_beta1, b2 = cfg.adam_beta2;
        const double bc1 = 1.0 - std::pow(b1, static_cast<double>(step_));
        const double bc2 = 1.0 - std::pow(b2, static_cast<double>(step_));
        for (std::size_t i = 0; i < params.size(); ++i) {
            Tensor& w = params.value(i);
            const Tensor& g = params.grad(i);
            Tensor& m = m_[i];
            Tensor& v = v_[i];
            for (std::size_t j = 0; j < w.size(); ++j) {
                const double gj = g[j];
                if (!std::isfinite(gj)) {
                    throw NumericError("adam_step: non-finite gradient in " + params.entry(i).name);
                }
                m[j] = b1 * m[j] + (1.0 - b1) * gj;
                v[j] = b2 * v[j] + (1.0 - b2) * gj * gj;
                const double mhat = m[j] / bc1;
                const double vhat = v[j] / bc2;
                w[j] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.adam_epsilon);
            }
        }
    }

private:
    std::vector<Tensor> m_, v_;
    long step_ = 0;
};

struct EpochRecord {
    int epoch = 0; // 1-based
    MetricSet train;
    MetricSet val;
    double penalty_value = 0.0;
    double wall_time_seconds = 0.0;
};

struct TrainingHistory {
    std::vector<EpochRecord> records;
    bool stopped_early = false;
    int best_epoch = 0;
    double total_wall_time = 0.0;
};

namespace detail {

inline Tensor gather_batch(const WindowSet& w, const std::vector<std::size_t>& idx,
                           std::size_t begin, std::size_t end, std::vector<double>& targets) {
    const std::size_t b = end - begin;
    const std::size_t lb = w.inputs.dim(1), nf = w.inputs.dim(2);
    Tensor x({b, lb, nf});
    targets.resize(b);
    for (std::size_t i = 0; i < b; ++i) {
        const std::size_t src = idx[begin + i];
        const double* from = w.inputs.data() + src * lb * nf;
        double* to = x.data() + i * lb * nf;
        std::copy(from, from + lb * nf, to);
        targets[i] = w.targets[src];
    }
    return x;
}

} // namespace detail

struct LossBreakdown {
    double total = 0.0;
    double data = 0.0;
    double penalty = 0.0;
    double reconstruction = 0.0; // unweighted, Autoencoder only
};

/// One forward/backward pass over a batch: total loss = data loss +
/// weight penalty (+ beta * reconstruction for the Autoencoder), gradients
/// accumulated into the model's ParamSet (which is zeroed first).
inline LossBreakdown loss_and_grad(Model& model, const Tensor& batch,
                                   const std::vector<double>& targets, const RegimeSpec& regime,
                                   const TrainConfig& cfg, SeededRng& rng) {
    if (batch.dim(0) == 0 || targets.size() != batch.dim(0)) {
        throw ValueError("loss_and_grad: batch/target mismatch");
    }
    const auto b = static_cast<double>(batch.dim(0));
    model.params().zero_grads();

    ModelCaches caches;
    ForwardResult fwd = model.forward(batch, Mode::Train, &rng, &caches);

    LossBreakdown out;
    Tensor d_pred({batch.dim(0), 1});
    for (std::size_t i = 0; i < batch.dim(0); ++i) {
        const double r = fwd.prediction.at(i, 0) - targets[i];
        if (cfg.loss == TrainLoss::Mse) {
            out.data += r * r / b;
            d_pred.at(i, 0) = 2.0 * r / b;
        } else {
            const double a = std::abs(r);
            if (a <= cfg.huber_delta) {
                out.data += 0.5 * r * r / b;
                d_pred.at(i, 0) = r / b;
            } else {
                out.data += cfg.huber_delta * (a - 0.5 * cfg.huber_delta) / b;
                d_pred.at(i, 0) = cfg.huber_delta * (r > 0.0 ? 1.0 : -1.0) / b;
            }
        }
    }

    if (model.has_reconstruction()) {
        const Tensor& recon = *fwd.reconstruction;
        const Tensor flat = batch.reshaped({batch.dim(0), batch.dim(1) * batch.dim(2)});
        const auto d = static_cast<double>(flat.size());
        const double beta = model.spec().ae_beta;
        Tensor d_recon(recon.shape());
        for (std::size_t i = 0; i < recon.size(); ++i) {
            const double r = recon[i] - flat[i];
            out.reconstruction += r * r / d;
            d_recon[i] = beta * 2.0 * r / d;
        }
        model.backward(caches, d_pred, &d_recon);
        out.total = out.data + beta * out.reconstruction;
    } else {
        model.backward(caches, d_pred);
        out.total = out.data;
    }

    out.penalty = penalty(model.params(), regime.penalty, regime.lambda);
    out.total += out.penalty;
    if (!std::isfinite(out.total)) throw NumericError("loss_and_grad: non-finite loss");
    return out;
}

/// Eval-mode predictions over a whole window set, in scaled target space.
inline std::vector<double> predict_all(const Model& model, const WindowSet& windows,
                                       std::size_t chunk = 256) {
    std::vector<double> preds;
    preds.reserve(windows.count());
    std::vector<std::size_t> idx(windows.count());
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<double> dummy;
    for (std::size_t begin = 0; begin < idx.size(); begin += chunk) {
        const std::size_t end = std::min(begin + chunk, idx.size());
        Tensor x = detail::gather_batch(windows, idx, begin, end, dummy);
        ForwardResult fwd = model.forward(x, Mode::Eval, nullptr, nullptr);
        for (std::size_t i = 0; i < end - begin; ++i) preds.push_back(fwd.prediction.at(i, 0));
    }
    return preds;
}

/// Metrics of a window set in original target units (scaler optional).
inline MetricSet evaluate_windows(const Model& model, const WindowSet& windows,
                                  const Scaler* scaler, double huber_delta = 1.0) {
    std::vector<double> yhat = predict_all(model, windows);
    std::vector<double> y = windows.targets;
    if (scaler != nullptr) {
        for (double& v : yhat) v = scaler->invert_target(v);
        for (double& v : y) v = scaler->invert_target(v);
    }
    return all_metrics(MetricInput{y, yhat}, HuberParams{huber_delta});
}

/// The optimization loop: seeded per-epoch shuffling, mini-batch Adam,
/// regime wiring (penalty, dropout mode, early stopping), per-epoch metric
/// records in original units and wall-clock (or deterministic) timing.
/// The model is trained in place.
inline TrainingHistory train(Model& model, const WindowSet& train_windows,
                             const WindowSet& val_windows, const RegimeSpec& regime,
                             const TrainConfig& cfg, const Scaler* scaler = nullptr) {
    cfg.validate();
    if (train_windows.count() == 0 || val_windows.count() == 0) {
        throw ValueError("train: empty train or validation window set");
    }

    SeededRng base(cfg.seed, 0x7e41);
    OptimizerState opt(model.params());
    EarlyStopper stopper(regime.patience, regime.min_delta);

    TrainingHistory history;
    std::vector<std::size_t> order(train_windows.count());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto e = static_cast<std::uint64_t>(epoch);
        SeededRng shuffle_rng = base.child(2 * e);
        SeededRng dropout_rng = base.child(2 * e + 1);
        shuffle_rng.shuffle(order);

        std::size_t n_batches = 0;
        std::vector<double> targets;
        for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
            const std::size_t end = std::min(begin + cfg.batch_size, order.size());
            Tensor x = detail::gather_batch(train_windows, order, begin, end, targets);
            try {
                loss_and_grad(model, x, targets, regime, cfg, dropout_rng);
                opt.adam_step(model.params(), cfg);
            } catch (const NumericError& err) {
                throw TrainError("epoch " + std::to_string(epoch) + ", batch " +
                                 std::to_string(n_batches) + ": " + err.what());
            }
            ++n_batches;
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.train = evaluate_windows(model, train_windows, scaler, cfg.huber_delta);
        rec.val = evaluate_windows(model, val_windows, scaler, cfg.huber_delta);
        rec.penalty_value = penalty_value(model.params(), regime.penalty, regime.lambda);
        if (cfg.timing == TimingMode::Fixed) {
            rec.wall_time_seconds = static_cast<double>(n_batches) * 1e-3;
        } else {
            const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
            rec.wall_time_seconds = std::max(dt.count(), 1e-9);
        }
        history.records.push_back(rec);
        history.total_wall_time += rec.wall_time_seconds;
        if (cfg.on_epoch_end) cfg.on_epoch_end(rec);

        if (regime.early_stopping) {
            const double monitored = cfg.monitor ? cfg.monitor(rec) : rec.val.mse;
            if (stopper.observe(epoch, monitored, model.params()) == EarlyStopper::Decision::Stop) {
                history.stopped_early = true;
                break;
            }
        }
    }

    if (regime.early_stopping && stopper.has_observation()) {
        stopper.restore_best(model.params());
        history.best_epoch = stopper.best_epoch();
    } else {
        history.best_epoch = history.records.empty() ? 0 : history.records.back().epoch;
    }
    return history;
}

} // namespace deepts
