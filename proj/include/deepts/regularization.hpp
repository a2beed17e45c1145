#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "deepts/errors.hpp"
#include "deepts/params.hpp"

namespace deepts {

/// The five benchmark regimes: unregularized baseline plus four cumulative
/// regularization combinations.
enum class RegimeId { B1, R1, R2, R3, R4 };

inline constexpr std::array<RegimeId, 5> kAllRegimes = {RegimeId::B1, RegimeId::R1, RegimeId::R2,
                                                        RegimeId::R3, RegimeId::R4};

inline std::string regime_id_str(RegimeId r) {
    switch (r) {
        case RegimeId::B1: return "b1";
        case RegimeId::R1: return "r1";
        case RegimeId::R2: return "r2";
        case RegimeId::R3: return "r3";
        case RegimeId::R4: return "r4";
    }
    throw ValueError("regime_id_str: bad regime");
}

inline std::string regime_label(RegimeId r) {
    switch (r) {
        case RegimeId::B1: return "B1";
        case RegimeId::R1: return "R1";
        case RegimeId::R2: return "R2";
        case RegimeId::R3: return "R3";
        case RegimeId::R4: return "R4";
    }
    throw ValueError("regime_label: bad regime");
}

inline RegimeId parse_regime_id(const std::string& s) {
    for (RegimeId r : kAllRegimes) {
        if (regime_id_str(r) == s) return r;
    }
    throw ValueError("unknown regime: " + s);
}

enum class PenaltyKind { None, L1, L2 };

/// Concrete regularization settings for one training run.
struct RegimeSpec {
    RegimeId id = RegimeId::B1;
    bool early_stopping = false;
    double dropout_rate = 0.0;
    PenaltyKind penalty = PenaltyKind::None;
    double lambda = 0.0;
    int patience = 10;
    double min_delta = 1e-4;
};

/// The fixed five-row mapping. lambda/patience/min_delta defaults are
/// artifact choices (the source experiment never states them) and may be
/// overridden by the caller after expansion.
inline RegimeSpec regime_spec(RegimeId id, double lambda = 1e-4, int patience = 10,
                              double min_delta = 1e-4, double dropout_rate = 0.10) {
    if (patience < 1) throw ValueError("regime_spec: patience must be positive");
    if (min_delta < 0.0) throw ValueError("regime_spec: min_delta must be non-negative");
    RegimeSpec s;
    s.id = id;
    s.patience = patience;
    s.min_delta = min_delta;
    switch (id) {
        case RegimeId::B1:
            break; // no early stopping, no dropout, no penalty
        case RegimeId::R1:
            s.early_stopping = true;
            break;
        case RegimeId::R2:
            s.early_stopping = true;
            s.dropout_rate = dropout_rate;
            break;
        case RegimeId::R3:
            s.early_stopping = true;
            s.dropout_rate = dropout_rate;
            s.penalty = PenaltyKind::L1;
            s.lambda = lambda;
            break;
        case RegimeId::R4:
            s.early_stopping = true;
            s.dropout_rate = dropout_rate;
            s.penalty = PenaltyKind::L2;
            s.lambda = lambda;
            break;
    }
    return s;
}

/// Adds the weight-penalty gradient in place and returns the penalty value.
/// L1: lambda * sum|w| with subgradient lambda*sign(w), sign(0) = 0.
/// L2: lambda * sum w^2 with gradient 2*lambda*w.
/// Applies to weight matrices/kernels only; biases are skipped.
inline double penalty(ParamSet& params, PenaltyKind kind, double lambda) {
    if (lambda < 0.0) throw ValueError("penalty: lambda must be non-negative");
    if (kind == PenaltyKind::None || lambda == 0.0) return 0.0;
    double value = 0.0;
    for (const auto& e : params.entries()) {
        if (!e.penalizable) continue;
        const Tensor& w = *e.value;
        Tensor& g = *e.grad;
        if (kind == PenaltyKind::L1) {
            for (std::size_t i = 0; i < w.size(); ++i) {
                value += lambda * std::abs(w[i]);
                if (w[i] > 0.0) {
                    g[i] += lambda;
                } else if (w[i] < 0.0) {
                    g[i] -= lambda;
                }
            }
        } else {
            for (std::size_t i = 0; i < w.size(); ++i) {
                value += lambda * w[i] * w[i];
                g[i] += 2.0 * lambda * w[i];
            }
        }
    }
    return value;
}

/// Penalty value only (no gradient side effect); used by evaluation paths.
inline double penalty_value(const ParamSet& params, PenaltyKind kind, double lambda) {
    if (lambda < 0.0) throw ValueError("penalty_value: lambda must be non-negative");
    if (kind == PenaltyKind::None || lambda == 0.0) return 0.0;
    double value = 0.0;
    for (const auto& e : params.entries()) {
        if (!e.penalizable) continue;
        const Tensor& w = *e.value;
        for (std::size_t i = 0; i < w.size(); ++i) {
            value += kind == PenaltyKind::L1 ? lambda * std::abs(w[i]) : lambda * w[i] * w[i];
        }
    }
    return value;
}

/// Validation-loss watcher: snapshots the best-epoch parameters and stops
/// training after `patience` epochs without improvement. Improvement means a
/// strict drop below best - min_delta.
class EarlyStopper {
public:
    enum class Decision { Continue, Stop };

    EarlyStopper(int patience, double min_delta) : patience_(patience), min_delta_(min_delta) {
        if (patience_ < 1) throw ValueError("EarlyStopper: patience must be positive");
        if (min_delta_ < 0.0) throw ValueError("EarlyStopper: min_delta must be non-negative");
    }

    /// Epochs must arrive in increasing order.
    Decision observe(int epoch, double val_metric, const ParamSet& current_params) {
        if (!std::isfinite(val_metric)) throw NumericError("EarlyStopper: non-finite metric");
        if (epoch <= last_epoch_) throw ValueError("EarlyStopper: epochs must increase");
        last_epoch_ = epoch;
        if (val_metric < best_value_ - min_delta_) {
            best_value_ = val_metric;
            best_epoch_ = epoch;
            snapshot_ = current_params.snapshot();
            stall_count_ = 0;
            return Decision::Continue;
        }
        ++stall_count_;
        return stall_count_ >= patience_ ? Decision::Stop : Decision::Continue;
    }

    bool has_observation() const { return last_epoch_ >= 0; }
    int best_epoch() const { return best_epoch_; }
    double best_value() const { return best_value_; }
    int stall_count() const { return stall_count_; }

    /// Writes the best-epoch snapshot back; bit-equal to what was observed.
    void restore_best(ParamSet& params) const {
        if (!has_observation()) throw ValueError("EarlyStopper: restore before any observation");
        params.restore(snapshot_);
    }

private:
    int patience_;
    double min_delta_;
    double best_value_ = std::numeric_limits<double>::infinity();
    int best_epoch_ = -1;
    int last_epoch_ = -1;
    int stall_count_ = 0;
    ParamSnapshot snapshot_;
};

} // namespace deepts
