#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "deepts/data.hpp"
#include "deepts/errors.hpp"
#include "deepts/metrics.hpp"
#include "deepts/models.hpp"
#include "deepts/regularization.hpp"
#include "deepts/training.hpp"

namespace deepts {

enum class MetricId { Rmse, Mse, Huber, Mae, Msle, R2 };

inline constexpr std::array<MetricId, 6> kAllMetrics = {MetricId::Rmse, MetricId::Mse,
                                                        MetricId::Huber, MetricId::Mae,
                                                        MetricId::Msle, MetricId::R2};

/// The five error-metric columns of the benchmark tables (R2 is reported in
/// the JSON but has no column in the table layouts).
inline constexpr std::array<MetricId, 5> kTableMetrics = {
    MetricId::Rmse, MetricId::Mse, MetricId::Huber, MetricId::Mae, MetricId::Msle};

inline std::string metric_label(MetricId m) {
    switch (m) {
        case MetricId::Rmse: return "RMSE";
        case MetricId::Mse: return "MSE";
        case MetricId::Huber: return "HUBER LOSS";
        case MetricId::Mae: return "MAE";
        case MetricId::Msle: return "MSLE";
        case MetricId::R2: return "R2S";
    }
    throw ValueError("metric_label: bad metric");
}

inline std::string metric_key(MetricId m) {
    switch (m) {
        case MetricId::Rmse: return "rmse";
        case MetricId::Mse: return "mse";
        case MetricId::Huber: return "huber";
        case MetricId::Mae: return "mae";
        case MetricId::Msle: return "msle";
        case MetricId::R2: return "r2";
    }
    throw ValueError("metric_key: bad metric");
}

inline std::optional<double> metric_value(const MetricSet& s, MetricId m) {
    switch (m) {
        case MetricId::Rmse: return s.rmse;
        case MetricId::Mse: return s.mse;
        case MetricId::Huber: return s.huber;
        case MetricId::Mae: return s.mae;
        case MetricId::Msle: return s.msle;
        case MetricId::R2: return s.r2;
    }
    throw ValueError("metric_value: bad metric");
}

/// Overfitting test applied per metric. Relative-gap mode compares final
/// train/test values; divergence mode scans the training history for k
/// consecutive epochs of rising validation error under falling train error.
struct OverfitCriterion {
    enum class Mode { RelativeGap, Divergence };
    Mode mode = Mode::RelativeGap;
    double tau = 0.10;
    double epsilon = 1e-9;
    int k = 5;

    void validate() const {
        if (!(tau > 0.0)) throw ValueError("OverfitCriterion: tau must be positive");
        if (k < 1) throw ValueError("OverfitCriterion: k must be positive");
    }
};

/// Per-metric overfit verdicts; a flag is absent when the metric itself was
/// undefined on either side.
using OverfitFlags = std::array<std::optional<bool>, 6>;

struct EvaluationReport {
    ModelKind kind = ModelKind::Dnn;
    RegimeId regime = RegimeId::B1;
    double test_ratio = 0.0;
    MetricSet train;
    MetricSet test;
    DiffSet diff;
    OverfitFlags flags{};
    double train_wall_time = 0.0;
    std::size_t param_count = 0;
    TrainingHistory history;
};

/// Six-metric evaluation of a trained model on the train and test
/// partitions, in original target units, plus the test-minus-train diffs.
inline EvaluationReport evaluate(const Model& model, const PartitionWindows& windows,
                                 const Scaler* scaler, double huber_delta = 1.0) {
    if (windows.train.count() == 0 || windows.test.count() == 0) {
        throw ValueError("evaluate: empty train or test windows");
    }
    EvaluationReport r;
    r.kind = model.spec().kind;
    r.train = evaluate_windows(model, windows.train, scaler, huber_delta);
    r.test = evaluate_windows(model, windows.test, scaler, huber_delta);
    r.diff = metric_diff(r.test, r.train);
    r.param_count = model.param_count();
    return r;
}

namespace detail {

/// Is `b` strictly worse than `a` for this metric? (higher error, lower r2)
inline bool worsened(MetricId m, double a, double b) {
    return m == MetricId::R2 ? b < a : b > a;
}

inline bool improved(MetricId m, double a, double b) {
    return m == MetricId::R2 ? b > a : b < a;
}

} // namespace detail

inline OverfitFlags detect_overfit(const EvaluationReport& report, const OverfitCriterion& c) {
    c.validate();
    OverfitFlags flags{};
    for (std::size_t i = 0; i < kAllMetrics.size(); ++i) {
        const MetricId m = kAllMetrics[i];
        if (c.mode == OverfitCriterion::Mode::RelativeGap) {
            const auto train = metric_value(report.train, m);
            const auto test = metric_value(report.test, m);
            if (!train || !test) continue; // undefined metric -> undefined flag
            if (m == MetricId::R2) {
                flags[i] = (*train - *test) > c.tau;
            } else {
                flags[i] = (*test - *train) / std::max(c.epsilon, *train) > c.tau;
            }
        } else {
            // divergence: k consecutive transitions with validation worsening
            // while train improves, anywhere in the history
            const auto& recs = report.history.records;
            if (recs.size() < 2) {
                flags[i] = false;
                continue;
            }
            bool defined = true;
            int run = 0;
            bool hit = false;
            for (std::size_t t = 1; t < recs.size() && defined; ++t) {
                const auto tr0 = metric_value(recs[t - 1].train, m);
                const auto tr1 = metric_value(recs[t].train, m);
                const auto va0 = metric_value(recs[t - 1].val, m);
                const auto va1 = metric_value(recs[t].val, m);
                if (!tr0 || !tr1 || !va0 || !va1) {
                    defined = false;
                    break;
                }
                if (detail::worsened(m, *va0, *va1) && detail::improved(m, *tr0, *tr1)) {
                    if (++run >= c.k) hit = true;
                } else {
                    run = 0;
                }
            }
            if (defined) flags[i] = hit;
        }
    }
    return flags;
}

// ---------------------------------------------------------------------------
// Benchmark matrix
// ---------------------------------------------------------------------------

struct BenchCell {
    ModelKind kind = ModelKind::Dnn;
    RegimeId regime = RegimeId::B1;
    double ratio = 0.0;
    std::uint64_t cell_seed = 0;
    bool ok = false;
    std::string error; // failure diagnostic; cell failures never abort the matrix
    EvaluationReport report;
};

struct BenchmarkMatrix {
    std::uint64_t base_seed = 0;
    std::string config_fingerprint;
    OverfitCriterion criterion;
    std::vector<BenchCell> cells; // ordered by (kind, regime, ratio)

    const BenchCell* find(ModelKind k, RegimeId r, double ratio) const {
        for (const auto& c : cells) {
            if (c.kind == k && c.regime == r && std::abs(c.ratio - ratio) < 1e-12) return &c;
        }
        return nullptr;
    }
};

/// FNV-1a over bytes; stable across platforms, used for cell seeds and
/// config fingerprints.
inline std::uint64_t fnv1a64(const std::string& s, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t cell_seed_for(std::uint64_t base_seed, ModelKind kind, RegimeId regime,
                                   double ratio) {
    const long pct = std::lround(ratio * 1000.0);
    std::string tag = model_kind_id(kind) + "/" + regime_id_str(regime) + "/" + std::to_string(pct);
    return hash_combine(base_seed, fnv1a64(tag));
}

/// Everything run_matrix needs besides the dataset itself.
struct BenchSettings {
    std::size_t lookback = 24;
    std::size_t horizon = 1;
    std::uint64_t base_seed = 42;
    TrainConfig train;
    double lambda = 1e-4;
    int patience = 10;
    double min_delta = 1e-4;
    double dropout_rate = 0.10;
    double ae_beta = 0.5;
    // hidden-size overrides: per-kind beats global beats built-in defaults
    std::vector<std::size_t> hidden_global;
    std::array<std::vector<std::size_t>, 7> hidden_by_kind{};
    std::size_t conv_filters = 32;
    std::size_t conv_width = 3;
    std::size_t conv_stride = 1;
    std::size_t pool_window = 2;
    OverfitCriterion criterion;
    bool shuffle_splits = false;
    unsigned workers = 1;
    std::string config_fingerprint;
};

/// Per-ratio dataset products, shared read-only across the cells of that
/// ratio column.
struct RatioData {
    double ratio = 0.0;
    SplitPlan plan;
    Scaler scaler;
    PartitionWindows windows;
};

inline RatioData prepare_ratio(const SeriesFrame& encoded, double ratio, const BenchSettings& s) {
    RatioData rd;
    rd.ratio = ratio;
    rd.plan = plan_splits(encoded.n_rows(), ratio);
    rd.scaler = Scaler::fit(encoded, rd.plan);
    const SeriesFrame scaled = rd.scaler.apply(encoded);
    rd.windows = make_windows(scaled, rd.plan, s.lookback, s.horizon);
    return rd;
}

inline ModelSpec model_spec_for(ModelKind kind, const RatioData& rd, const RegimeSpec& regime,
                                const BenchSettings& s) {
    ModelSpec spec;
    spec.kind = kind;
    spec.lookback = s.lookback;
    spec.features = rd.windows.feature_count;
    const auto& per_kind = s.hidden_by_kind[static_cast<std::size_t>(kind)];
    spec.hidden = per_kind.empty() ? s.hidden_global : per_kind;
    spec.dropout_rate = regime.dropout_rate;
    spec.ae_beta = s.ae_beta;
    spec.conv_filters = s.conv_filters;
    spec.conv_width = s.conv_width;
    spec.conv_stride = s.conv_stride;
    spec.pool_window = s.pool_window;
    return spec;
}

/// Trains and evaluates one (kind, regime, ratio) cell.
inline BenchCell run_cell(ModelKind kind, RegimeId regime_id, const RatioData& rd,
                          const BenchSettings& s) {
    BenchCell cell;
    cell.kind = kind;
    cell.regime = regime_id;
    cell.ratio = rd.ratio;
    cell.cell_seed = cell_seed_for(s.base_seed, kind, regime_id, rd.ratio);
    try {
        const RegimeSpec regime =
            regime_spec(regime_id, s.lambda, s.patience, s.min_delta, s.dropout_rate);
        const ModelSpec spec = model_spec_for(kind, rd, regime, s);
        SeededRng build_rng(cell.cell_seed, 0xB11D);
        Model model = Model::build(spec, build_rng);
        TrainConfig cfg = s.train;
        cfg.seed = cell.cell_seed;
        TrainingHistory hist =
            train(model, rd.windows.train, rd.windows.val, regime, cfg, &rd.scaler);
        cell.report = evaluate(model, rd.windows, &rd.scaler, cfg.huber_delta);
        cell.report.kind = kind;
        cell.report.regime = regime_id;
        cell.report.test_ratio = rd.ratio;
        cell.report.history = std::move(hist);
        cell.report.train_wall_time = cell.report.history.total_wall_time;
        cell.report.flags = detect_overfit(cell.report, s.criterion);
        cell.ok = true;
    } catch (const std::exception& e) {
        cell.ok = false;
        cell.error = e.what();
    }
    return cell;
}

/// Runs the full (kinds x regimes x ratios) grid. Cells are independent,
/// seeded by hash(base seed, kind, regime, ratio), and merged in a fixed
/// order, so the result is bit-identical for any worker count.
inline BenchmarkMatrix run_matrix(const std::vector<ModelKind>& kinds,
                                  const std::vector<RegimeId>& regimes,
                                  const std::vector<double>& ratios, const SeriesFrame& raw,
                                  const BenchSettings& settings) {
    settings.criterion.validate();
    if (kinds.empty() || regimes.empty() || ratios.empty()) {
        throw ValueError("run_matrix: empty kind/regime/ratio request");
    }

    SeriesFrame frame = encode_categoricals(raw);
    if (settings.shuffle_splits) {
        SeededRng shuffle_rng(settings.base_seed, 0x5F1E);
        frame = shuffle_rows(frame, shuffle_rng);
    }

    std::vector<RatioData> ratio_data;
    ratio_data.reserve(ratios.size());
    for (double r : ratios) ratio_data.push_back(prepare_ratio(frame, r, settings));

    struct Job {
        ModelKind kind;
        RegimeId regime;
        const RatioData* data;
    };
    std::vector<Job> jobs;
    for (ModelKind k : kinds) {
        for (RegimeId r : regimes) {
            for (const auto& rd : ratio_data) jobs.push_back({k, r, &rd});
        }
    }

    BenchmarkMatrix matrix;
    matrix.base_seed = settings.base_seed;
    matrix.config_fingerprint = settings.config_fingerprint;
    matrix.criterion = settings.criterion;
    matrix.cells.resize(jobs.size());

    const unsigned workers = std::max(1u, settings.workers);
    if (workers == 1) {
        for (std::size_t i = 0; i < jobs.size(); ++i) {
            matrix.cells[i] = run_cell(jobs[i].kind, jobs[i].regime, *jobs[i].data, settings);
        }
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&]() {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= jobs.size()) break;
                matrix.cells[i] = run_cell(jobs[i].kind, jobs[i].regime, *jobs[i].data, settings);
            }
        };
        std::vector<std::thread> pool;
        const unsigned n = std::min<std::size_t>(workers, jobs.size());
        pool.reserve(n);
        for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return matrix;
}

// ---------------------------------------------------------------------------
// Best-regime selection
// ---------------------------------------------------------------------------

/// Overfit gap used for regime ranking: test - train for error metrics,
/// train - test for r2 (larger always means more overfit).
inline std::optional<double> overfit_gap(const EvaluationReport& r, MetricId m) {
    const auto train = metric_value(r.train, m);
    const auto test = metric_value(r.test, m);
    if (!train || !test) return std::nullopt;
    return m == MetricId::R2 ? *train - *test : *test - *train;
}

/// The regularization regime (R1..R4; B1 is the baseline, never a candidate)
/// with the smallest overfit gap for one (model, ratio, metric). Ties break
/// toward the better test metric, then toward the earlier regime.
inline RegimeId best_regime(const BenchmarkMatrix& matrix, ModelKind kind, double ratio,
                            MetricId metric) {
    static constexpr std::array<RegimeId, 4> candidates = {RegimeId::R1, RegimeId::R2, RegimeId::R3,
                                                           RegimeId::R4};
    const BenchCell* best = nullptr;
    double best_gap = 0.0, best_test = 0.0;
    for (RegimeId reg : candidates) {
        const BenchCell* cell = matrix.find(kind, reg, ratio);
        if (cell == nullptr || !cell->ok) {
            throw ValueError("best_regime: missing cell " + model_kind_id(kind) + "/" +
                             regime_id_str(reg));
        }
        const auto gap = overfit_gap(cell->report, metric);
        const auto test = metric_value(cell->report.test, metric);
        if (!gap || !test) {
            throw ValueError("best_regime: metric undefined in cell " + model_kind_id(kind) + "/" +
                             regime_id_str(reg));
        }
        const bool better =
            best == nullptr || *gap < best_gap ||
            (*gap == best_gap && (metric == MetricId::R2 ? *test > best_test : *test < best_test));
        if (better) {
            best = cell;
            best_gap = *gap;
            best_test = *test;
        }
    }
    return best->regime;
}

/// All regimes tied for the smallest gap (the table-rendering variant; the
/// published table lists ties explicitly).
inline std::vector<RegimeId> best_regime_ties(const BenchmarkMatrix& matrix, ModelKind kind,
                                              double ratio, MetricId metric, double tol = 1e-12) {
    static constexpr std::array<RegimeId, 4> candidates = {RegimeId::R1, RegimeId::R2, RegimeId::R3,
                                                           RegimeId::R4};
    std::vector<std::pair<RegimeId, double>> gaps;
    for (RegimeId reg : candidates) {
        const BenchCell* cell = matrix.find(kind, reg, ratio);
        if (cell == nullptr || !cell->ok) continue;
        const auto gap = overfit_gap(cell->report, metric);
        if (gap) gaps.emplace_back(reg, *gap);
    }
    std::vector<RegimeId> out;
    if (gaps.empty()) return out;
    double best = gaps.front().second;
    for (const auto& [reg, gap] : gaps) best = std::min(best, gap);
    for (const auto& [reg, gap] : gaps) {
        if (gap <= best + tol) out.push_back(reg);
    }
    return out;
}

} // namespace deepts
