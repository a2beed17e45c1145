#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "deepts/errors.hpp"
#include "deepts/rng.hpp"
#include "deepts/tensor.hpp"

namespace deepts {

enum class ColumnRole { Timestamp, Target, NumericFeature, CategoricalFeature, OneHotFeature };

inline std::string column_role_str(ColumnRole r) {
    switch (r) {
        case ColumnRole::Timestamp: return "timestamp";
        case ColumnRole::Target: return "target";
        case ColumnRole::NumericFeature: return "numeric";
        case ColumnRole::CategoricalFeature: return "categorical";
        case ColumnRole::OneHotFeature: return "onehot";
    }
    throw ValueError("column_role_str: bad role");
}

inline ColumnRole parse_column_role(const std::string& s) {
    if (s == "timestamp") return ColumnRole::Timestamp;
    if (s == "target") return ColumnRole::Target;
    if (s == "numeric") return ColumnRole::NumericFeature;
    if (s == "categorical") return ColumnRole::CategoricalFeature;
    if (s == "onehot") return ColumnRole::OneHotFeature;
    throw ValueError("unknown column role: " + s);
}

struct ColumnDesc {
    std::string name;
    ColumnRole role = ColumnRole::NumericFeature;
    std::string units;
    std::vector<std::string> categories; // vocabulary, categorical columns only
};

/// Ordered column descriptors; exactly one target and one timestamp column.
struct Schema {
    std::vector<ColumnDesc> columns;

    void validate() const {
        std::size_t targets = 0, stamps = 0;
        for (const auto& c : columns) {
            if (c.name.empty()) throw ValueError("Schema: empty column name");
            if (c.role == ColumnRole::Target) ++targets;
            if (c.role == ColumnRole::Timestamp) ++stamps;
            if (c.role == ColumnRole::CategoricalFeature && c.categories.empty()) {
                throw ValueError("Schema: categorical column " + c.name + " lists no categories");
            }
        }
        if (targets != 1) throw ValueError("Schema: exactly one target column required");
        if (stamps != 1) throw ValueError("Schema: exactly one timestamp column required");
    }

    std::size_t index_of(const std::string& name) const {
        for (std::size_t i = 0; i < columns.size(); ++i) {
            if (columns[i].name == name) return i;
        }
        throw ValueError("Schema: no column named " + name);
    }

    std::size_t target_index() const {
        for (std::size_t i = 0; i < columns.size(); ++i) {
            if (columns[i].role == ColumnRole::Target) return i;
        }
        throw ValueError("Schema: no target column");
    }

    std::size_t timestamp_index() const {
        for (std::size_t i = 0; i < columns.size(); ++i) {
            if (columns[i].role == ColumnRole::Timestamp) return i;
        }
        throw ValueError("Schema: no timestamp column");
    }
};

/// Schema file: JSON with a "columns" array of {name, role, units?,
/// categories?} objects (grammar documented in the README).
inline Schema load_schema(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open schema file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("schema parse error in " + path + ": " + e.what());
    }
    if (!j.contains("columns") || !j["columns"].is_array()) {
        throw IoError("schema file " + path + " lacks a columns array");
    }
    Schema s;
    for (const auto& cj : j["columns"]) {
        ColumnDesc c;
        c.name = cj.at("name").get<std::string>();
        c.role = parse_column_role(cj.at("role").get<std::string>());
        if (cj.contains("units")) c.units = cj["units"].get<std::string>();
        if (cj.contains("categories")) {
            for (const auto& cat : cj["categories"]) c.categories.push_back(cat.get<std::string>());
        }
        s.columns.push_back(std::move(c));
    }
    s.validate();
    return s;
}

inline void save_schema(const Schema& s, const std::string& path) {
    nlohmann::ordered_json j;
    j["columns"] = nlohmann::ordered_json::array();
    for (const auto& c : s.columns) {
        nlohmann::ordered_json cj;
        cj["name"] = c.name;
        cj["role"] = column_role_str(c.role);
        if (!c.units.empty()) cj["units"] = c.units;
        if (!c.categories.empty()) cj["categories"] = c.categories;
        j["columns"].push_back(std::move(cj));
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot write schema file: " + path);
    out << j.dump(2) << '\n';
}

/// The ingested tabular dataset: column-major float64 storage aligned with
/// the schema, rows sorted ascending by timestamp. Categorical cells hold
/// vocabulary indices. Immutable after construction.
struct SeriesFrame {
    Schema schema;
    std::vector<std::vector<double>> cols; // [column][row]
    std::size_t dropped_rows = 0;

    std::size_t n_rows() const { return cols.empty() ? 0 : cols[0].size(); }
    const std::vector<double>& col(std::size_t i) const { return cols.at(i); }
    const std::vector<double>& col(const std::string& name) const {
        return cols.at(schema.index_of(name));
    }
};

namespace detail {

/// One CSV record, honoring RFC-4180 quoting.
inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            out.push_back(std::move(field));
            field.clear();
        } else if (ch != '\r') {
            field += ch;
        }
    }
    out.push_back(std::move(field));
    return out;
}

inline bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* begin = s.c_str();
    char* end = nullptr;
    out = std::strtod(begin, &end);
    while (end != nullptr && *end == ' ') ++end;
    return end == begin + s.size() && std::isfinite(out);
}

/// Timestamps: plain numbers pass through; otherwise ISO-ish
/// "YYYY-MM-DD[ T]HH:MM[:SS]" converts to seconds since 1970 (UTC, civil
/// arithmetic, leap seconds ignored).
inline bool parse_timestamp(const std::string& s, double& out) {
    if (parse_double(s, out)) return true;
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
    char sep = 0;
    const int got = std::sscanf(s.c_str(), "%d-%d-%d%c%d:%d:%d", &y, &mo, &d, &sep, &h, &mi, &sec);
    if (got < 6 || mo < 1 || mo > 12 || d < 1 || d > 31) return false;
    // days since epoch by civil-date arithmetic (Howard Hinnant's algorithm)
    const int yy = y - (mo <= 2);
    const int era = (yy >= 0 ? yy : yy - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(yy - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(mo + (mo > 2 ? -3 : 9)) + 2u) / 5u +
                         static_cast<unsigned>(d) - 1u;
    const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
    const long long days = static_cast<long long>(era) * 146097LL + static_cast<long long>(doe) - 719468LL;
    out = static_cast<double>(days * 86400LL + h * 3600LL + mi * 60LL + sec);
    return true;
}

} // namespace detail

/// Typed CSV ingestion against a schema. The header must contain every
/// schema column (extra CSV columns are ignored); rows with unparseable,
/// missing or out-of-vocabulary values are dropped and counted. The result
/// is sorted ascending by timestamp.
inline SeriesFrame load_csv(const std::string& path, const Schema& schema) {
    schema.validate();
    std::ifstream in(path);
    if (!in) throw IoError("cannot open dataset: " + path);
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty dataset file: " + path);
    const auto header = detail::split_csv_line(line);
    std::vector<std::size_t> src(schema.columns.size());
    for (std::size_t i = 0; i < schema.columns.size(); ++i) {
        auto it = std::find(header.begin(), header.end(), schema.columns[i].name);
        if (it == header.end()) {
            throw IoError("header of " + path + " lacks schema column '" + schema.columns[i].name + "'");
        }
        src[i] = static_cast<std::size_t>(it - header.begin());
    }

    SeriesFrame frame;
    frame.schema = schema;
    frame.cols.assign(schema.columns.size(), {});
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        const auto fields = detail::split_csv_line(line);
        std::vector<double> row(schema.columns.size());
        bool ok = true;
        for (std::size_t i = 0; i < schema.columns.size() && ok; ++i) {
            if (src[i] >= fields.size()) {
                ok = false;
                break;
            }
            const std::string& cell = fields[src[i]];
            const ColumnDesc& desc = schema.columns[i];
            switch (desc.role) {
                case ColumnRole::Timestamp:
                    ok = detail::parse_timestamp(cell, row[i]);
                    break;
                case ColumnRole::CategoricalFeature: {
                    auto it = std::find(desc.categories.begin(), desc.categories.end(), cell);
                    if (it == desc.categories.end()) {
                        ok = false;
                    } else {
                        row[i] = static_cast<double>(it - desc.categories.begin());
                    }
                    break;
                }
                default:
                    ok = detail::parse_double(cell, row[i]);
            }
        }
        if (!ok) {
            ++frame.dropped_rows;
            continue;
        }
        for (std::size_t i = 0; i < row.size(); ++i) frame.cols[i].push_back(row[i]);
    }
    if (frame.n_rows() == 0) throw IoError("no usable rows in " + path);

    // stable sort by timestamp
    const auto& ts = frame.cols[schema.timestamp_index()];
    std::vector<std::size_t> order(frame.n_rows());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&ts](std::size_t a, std::size_t b) { return ts[a] < ts[b]; });
    for (auto& col : frame.cols) {
        std::vector<double> sorted(col.size());
        for (std::size_t i = 0; i < order.size(); ++i) sorted[i] = col[order[i]];
        col = std::move(sorted);
    }
    return frame;
}

/// Writes a frame back out as CSV (categorical indices become labels).
inline void save_csv(const SeriesFrame& frame, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write dataset: " + path);
    out.precision(17);
    for (std::size_t i = 0; i < frame.schema.columns.size(); ++i) {
        if (i) out << ',';
        out << frame.schema.columns[i].name;
    }
    out << '\n';
    for (std::size_t r = 0; r < frame.n_rows(); ++r) {
        for (std::size_t i = 0; i < frame.schema.columns.size(); ++i) {
            if (i) out << ',';
            const ColumnDesc& desc = frame.schema.columns[i];
            if (desc.role == ColumnRole::CategoricalFeature) {
                out << desc.categories.at(static_cast<std::size_t>(frame.cols[i][r]));
            } else {
                out << frame.cols[i][r];
            }
        }
        out << '\n';
    }
}

/// Deterministically permutes rows; used by the optional shuffled-split mode.
inline SeriesFrame shuffle_rows(const SeriesFrame& frame, SeededRng& rng) {
    std::vector<std::size_t> order(frame.n_rows());
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    SeriesFrame out;
    out.schema = frame.schema;
    out.dropped_rows = frame.dropped_rows;
    out.cols.assign(frame.cols.size(), {});
    for (std::size_t c = 0; c < frame.cols.size(); ++c) {
        out.cols[c].resize(frame.n_rows());
        for (std::size_t i = 0; i < order.size(); ++i) out.cols[c][i] = frame.cols[c][order[i]];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Descriptive statistics
// ---------------------------------------------------------------------------

struct ColumnStats {
    std::string name;
    double mean = 0.0;
    double median = 0.0;
    double std_dev = 0.0;               // sample (n-1) standard deviation
    std::optional<double> skewness;     // g1 = m3 / m2^(3/2)
    std::optional<double> kurtosis;     // excess kurtosis m4/m2^2 - 3
};

struct StatsTable {
    std::vector<ColumnStats> columns;
};

inline ColumnStats column_stats(const std::string& name, const std::vector<double>& v) {
    const std::size_t n = v.size();
    if (n < 2) throw ValueError("describe: need at least 2 rows, column " + name);
    ColumnStats s;
    s.name = name;
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(n);
    s.mean = mean;

    std::vector<double> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    s.median = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);

    double m2 = 0.0, m3 = 0.0, m4 = 0.0, ss = 0.0;
    for (double x : v) {
        const double d = x - mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
        ss += d2;
    }
    m2 /= static_cast<double>(n);
    m3 /= static_cast<double>(n);
    m4 /= static_cast<double>(n);
    s.std_dev = std::sqrt(ss / static_cast<double>(n - 1));
    if (m2 > 0.0) {
        s.skewness = m3 / std::pow(m2, 1.5);
        s.kurtosis = m4 / (m2 * m2) - 3.0;
    }
    return s;
}

/// Mean/median/sample-std/skewness/excess-kurtosis for every numeric column
/// (target included, timestamps and categoricals skipped).
inline StatsTable describe(const SeriesFrame& frame) {
    StatsTable table;
    for (std::size_t i = 0; i < frame.schema.columns.size(); ++i) {
        const ColumnDesc& c = frame.schema.columns[i];
        if (c.role == ColumnRole::Timestamp || c.role == ColumnRole::CategoricalFeature) continue;
        table.columns.push_back(column_stats(c.name, frame.cols[i]));
    }
    return table;
}

// ---------------------------------------------------------------------------
// Split scheduling
// ---------------------------------------------------------------------------

/// Chronological three-way split: train earliest, then validation, then test.
struct SplitPlan {
    double test_ratio = 0.0;
    std::size_t n_total = 0, n_train = 0, n_val = 0, n_test = 0;

    std::size_t train_begin() const { return 0; }
    std::size_t train_end() const { return n_train; }
    std::size_t val_begin() const { return n_train; }
    std::size_t val_end() const { return n_train + n_val; }
    std::size_t test_begin() const { return n_train + n_val; }
    std::size_t test_end() const { return n_total; }
};

/// Test count is round-half-up(n*r); validation is round-half-up of the
/// remainder times r; training takes the rest. This rounding reproduces the
/// published 21,045-row schedule exactly at every benchmark ratio.
inline SplitPlan plan_splits(std::size_t n_total, double r) {
    if (!(r > 0.0) || r > 0.5) throw ValueError("plan_splits: ratio must lie in (0, 0.5]");
    if (n_total < 10) throw ValueError("plan_splits: need at least 10 rows");
    SplitPlan p;
    p.test_ratio = r;
    p.n_total = n_total;
    p.n_test = static_cast<std::size_t>(std::floor(static_cast<double>(n_total) * r + 0.5));
    const std::size_t rem = n_total - p.n_test;
    p.n_val = static_cast<std::size_t>(std::floor(static_cast<double>(rem) * r + 0.5));
    p.n_train = rem - p.n_val;
    if (p.n_train == 0 || p.n_val == 0 || p.n_test == 0) {
        throw ValueError("plan_splits: a partition came out empty");
    }
    return p;
}

// ---------------------------------------------------------------------------
// Normalization
// ---------------------------------------------------------------------------

/// Z-score scaler fit on the training partition only. Constant columns pass
/// through unscaled and are flagged. The target column is scaled too; the
/// inverse transform reports in original units.
class Scaler {
public:
    static Scaler fit(const SeriesFrame& frame, const SplitPlan& plan) {
        if (plan.n_total != frame.n_rows()) throw ValueError("Scaler::fit: plan does not match frame");
        if (plan.n_train == 0) throw ValueError("Scaler::fit: empty training range");
        Scaler s;
        s.mean_.assign(frame.cols.size(), 0.0);
        s.std_.assign(frame.cols.size(), 1.0);
        s.scaled_.assign(frame.cols.size(), false);
        for (std::size_t c = 0; c < frame.schema.columns.size(); ++c) {
            const ColumnRole role = frame.schema.columns[c].role;
            if (role != ColumnRole::NumericFeature && role != ColumnRole::Target) continue;
            double mean = 0.0;
            for (std::size_t r = plan.train_begin(); r < plan.train_end(); ++r) {
                mean += frame.cols[c][r];
            }
            mean /= static_cast<double>(plan.n_train);
            double var = 0.0;
            for (std::size_t r = plan.train_begin(); r < plan.train_end(); ++r) {
                const double d = frame.cols[c][r] - mean;
                var += d * d;
            }
            var /= static_cast<double>(plan.n_train);
            const double sd = std::sqrt(var);
            if (sd > 0.0) {
                s.mean_[c] = mean;
                s.std_[c] = sd;
                s.scaled_[c] = true;
            } else {
                s.constant_.push_back(frame.schema.columns[c].name);
                if (role == ColumnRole::Target) {
                    throw ValueError("Scaler::fit: constant target column in training range");
                }
            }
        }
        s.target_index_ = frame.schema.target_index();
        return s;
    }

    SeriesFrame apply(const SeriesFrame& frame) const {
        if (frame.cols.size() != mean_.size()) throw ValueError("Scaler::apply: column count mismatch");
        SeriesFrame out = frame;
        for (std::size_t c = 0; c < out.cols.size(); ++c) {
            if (!scaled_[c]) continue;
            for (double& v : out.cols[c]) v = (v - mean_[c]) / std_[c];
        }
        return out;
    }

    const std::vector<std::string>& constant_columns() const { return constant_; }

    double target_mean() const { return mean_.at(target_index_); }
    double target_std() const { return std_.at(target_index_); }

    double scale_target(double y) const { return (y - target_mean()) / target_std(); }
    double invert_target(double z) const { return z * target_std() + target_mean(); }

private:
    std::vector<double> mean_, std_;
    std::vector<bool> scaled_;
    std::vector<std::string> constant_;
    std::size_t target_index_ = 0;
};

// ---------------------------------------------------------------------------
// One-hot encoding
// ---------------------------------------------------------------------------

/// Replaces every categorical column by a block of 0/1 columns named
/// "col=value", one per vocabulary entry, in vocabulary order.
inline SeriesFrame encode_categoricals(const SeriesFrame& frame) {
    SeriesFrame out;
    out.dropped_rows = frame.dropped_rows;
    const std::size_t n = frame.n_rows();
    for (std::size_t c = 0; c < frame.schema.columns.size(); ++c) {
        const ColumnDesc& desc = frame.schema.columns[c];
        if (desc.role != ColumnRole::CategoricalFeature) {
            out.schema.columns.push_back(desc);
            out.cols.push_back(frame.cols[c]);
            continue;
        }
        const std::size_t k = desc.categories.size();
        std::vector<std::vector<double>> block(k, std::vector<double>(n, 0.0));
        for (std::size_t r = 0; r < n; ++r) {
            const double raw = frame.cols[c][r];
            const auto idx = static_cast<std::size_t>(raw);
            if (raw < 0.0 || idx >= k || static_cast<double>(idx) != raw) {
                throw ValueError("encode_categoricals: value outside vocabulary in column " + desc.name);
            }
            block[idx][r] = 1.0;
        }
        for (std::size_t v = 0; v < k; ++v) {
            ColumnDesc oh;
            oh.name = desc.name + "=" + desc.categories[v];
            oh.role = ColumnRole::OneHotFeature;
            out.schema.columns.push_back(std::move(oh));
            out.cols.push_back(std::move(block[v]));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Supervised windows
// ---------------------------------------------------------------------------

/// Sliding windows over one partition: window t covers rows [t, t+L) and is
/// labeled with the target of row t+L+H-1.
struct WindowSet {
    Tensor inputs;                    // [count x lookback x features]
    std::vector<double> targets;      // scaled target values
    std::vector<std::size_t> sources; // absolute frame row of each window start

    std::size_t count() const { return targets.size(); }
};

struct PartitionWindows {
    WindowSet train, val, test;
    std::size_t feature_count = 0;
    std::vector<std::string> feature_names;
};

/// Builds train/val/test window sets; windows never cross a partition
/// boundary. Feature columns are every numeric and one-hot column in schema
/// order (timestamp and target excluded).
inline PartitionWindows make_windows(const SeriesFrame& frame, const SplitPlan& plan,
                                     std::size_t lookback, std::size_t horizon) {
    if (lookback == 0 || horizon == 0) throw ValueError("make_windows: lookback and horizon must be positive");
    if (plan.n_total != frame.n_rows()) throw ValueError("make_windows: plan does not match frame");

    std::vector<std::size_t> feat_cols;
    std::vector<std::string> feat_names;
    for (std::size_t c = 0; c < frame.schema.columns.size(); ++c) {
        const ColumnRole role = frame.schema.columns[c].role;
        if (role == ColumnRole::NumericFeature || role == ColumnRole::OneHotFeature) {
            feat_cols.push_back(c);
            feat_names.push_back(frame.schema.columns[c].name);
        }
    }
    if (feat_cols.empty()) throw ValueError("make_windows: no feature columns");
    const std::size_t target = frame.schema.target_index();

    auto build = [&](std::size_t begin, std::size_t end, const char* part) {
        const std::size_t len = end - begin;
        if (len < lookback + horizon) {
            throw ValueError(std::string("make_windows: ") + part + " partition of " +
                             std::to_string(len) + " rows is too short for lookback " +
                             std::to_string(lookback) + " + horizon " + std::to_string(horizon));
        }
        const std::size_t count = len - lookback - horizon + 1;
        WindowSet w;
        w.inputs = Tensor({count, lookback, feat_cols.size()});
        w.targets.resize(count);
        w.sources.resize(count);
        for (std::size_t t = 0; t < count; ++t) {
            const std::size_t row0 = begin + t;
            for (std::size_t l = 0; l < lookback; ++l) {
                for (std::size_t f = 0; f < feat_cols.size(); ++f) {
                    w.inputs.at(t, l, f) = frame.cols[feat_cols[f]][row0 + l];
                }
            }
            w.targets[t] = frame.cols[target][row0 + lookback + horizon - 1];
            w.sources[t] = row0;
        }
        return w;
    };

    PartitionWindows out;
    out.feature_count = feat_cols.size();
    out.feature_names = std::move(feat_names);
    out.train = build(plan.train_begin(), plan.train_end(), "train");
    out.val = build(plan.val_begin(), plan.val_end(), "validation");
    out.test = build(plan.test_begin(), plan.test_end(), "test");
    return out;
}

// ---------------------------------------------------------------------------
// Synthetic data
// ---------------------------------------------------------------------------

struct SynthConfig {
    std::uint64_t seed = 7;
    std::size_t n = 4000;
    std::size_t locations = 12;
    double noise = 1.0; // scales the irreducible target noise
};

inline Schema synth_schema(std::size_t locations) {
    Schema s;
    auto add = [&s](const std::string& name, ColumnRole role, const std::string& units = "") {
        ColumnDesc c;
        c.name = name;
        c.role = role;
        c.units = units;
        s.columns.push_back(std::move(c));
    };
    add("timestamp", ColumnRole::Timestamp, "s");
    add("power_output", ColumnRole::Target, "W");
    add("ambient_temp", ColumnRole::NumericFeature, "C");
    add("humidity", ColumnRole::NumericFeature, "%");
    add("wind_speed", ColumnRole::NumericFeature, "km/h");
    add("visibility", ColumnRole::NumericFeature, "km");
    add("pressure", ColumnRole::NumericFeature, "millibar");
    add("cloud_ceiling", ColumnRole::NumericFeature, "km");
    add("latitude", ColumnRole::NumericFeature, "deg");
    add("longitude", ColumnRole::NumericFeature, "deg");
    add("altitude", ColumnRole::NumericFeature, "m");

    ColumnDesc loc;
    loc.name = "location";
    loc.role = ColumnRole::CategoricalFeature;
    for (std::size_t i = 0; i < locations; ++i) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "loc%02u", static_cast<unsigned>(i + 1) % 100u);
        loc.categories.emplace_back(buf);
    }
    s.columns.push_back(std::move(loc));

    ColumnDesc season;
    season.name = "season";
    season.role = ColumnRole::CategoricalFeature;
    season.categories = {"winter", "spring", "summer", "autumn"};
    s.columns.push_back(std::move(season));
    return s;
}

/// Deterministic photovoltaic-flavored series: hourly cadence, diurnal solar
/// cycle clipped at zero, seasonal drift, correlated weather features and a
/// pool of site locations. Identical (seed, n, locations) inputs give
/// bit-identical frames.
inline SeriesFrame synthesize(const SynthConfig& cfg) {
    if (cfg.n < 100) throw ValueError("synthesize: n must be at least 100");
    if (cfg.locations < 1 || cfg.locations > 99) {
        throw ValueError("synthesize: locations must lie in [1, 99]");
    }
    const Schema schema = synth_schema(cfg.locations);
    SeriesFrame frame;
    frame.schema = schema;
    frame.cols.assign(schema.columns.size(), {});
    for (auto& c : frame.cols) c.reserve(cfg.n);

    // fixed per-site geography, independent of n
    SeededRng site_rng(cfg.seed, 0xA11E5);
    std::vector<double> lat(cfg.locations), lon(cfg.locations), alt(cfg.locations), amp(cfg.locations);
    for (std::size_t l = 0; l < cfg.locations; ++l) {
        lat[l] = site_rng.uniform(36.0, 43.5);
        lon[l] = site_rng.uniform(-9.0, 3.0);
        alt[l] = site_rng.uniform(0.0, 900.0);
        amp[l] = site_rng.uniform(65.0, 85.0);
    }

    SeededRng rng(cfg.seed, 0x5EED5);
    const double two_pi = 6.283185307179586476925286766559;
    const double base_ts = 1577836800.0; // 2020-01-01T00:00:00Z
    for (std::size_t i = 0; i < cfg.n; ++i) {
        const std::size_t loc = i % cfg.locations;
        const double hours = static_cast<double>(i);
        const double hour_of_day = static_cast<double>(i % 24);
        const double day = std::floor(hours / 24.0);
        const double day_of_year = std::fmod(day, 365.0);

        const double solar = std::max(0.0, std::sin((hour_of_day - 6.0) / 12.0 * 3.14159265358979323846));
        const double season_f = 0.75 + 0.25 * std::sin(two_pi * (day_of_year - 80.0) / 365.0);
        double cloud = 0.5 + 0.35 * std::sin(two_pi * hours / 97.0) + 0.25 * rng.normal();
        cloud = std::clamp(cloud, 0.0, 1.0);

        const double power_clean = amp[loc] * solar * season_f * (1.0 - 0.7 * cloud);
        const double power =
            std::max(0.0, power_clean + cfg.noise * rng.normal(0.0, 1.5) * (0.3 + solar));

        const double temp = 14.0 + 12.0 * (season_f - 0.75) / 0.25 * 0.5 + 9.0 * solar -
                            alt[loc] / 150.0 + rng.normal(0.0, 2.0);
        const double humidity =
            std::clamp(62.0 - 1.1 * (temp - 14.0) + 22.0 * cloud + rng.normal(0.0, 6.0), 4.0, 100.0);
        const double wind = std::abs(rng.normal(9.5, 5.5));
        const double visibility = std::clamp(10.5 - 6.5 * cloud + rng.normal(0.0, 1.2), 0.2, 10.0);
        const double pressure =
            931.0 + 24.0 * std::sin(two_pi * hours / 211.0) - alt[loc] / 40.0 + rng.normal(0.0, 4.0);
        const double ceiling = std::clamp(760.0 - 520.0 * cloud + rng.normal(0.0, 90.0), 0.0, 1100.0);

        const int season_idx = day_of_year < 59 || day_of_year >= 334 ? 0
                               : day_of_year < 151                    ? 1
                               : day_of_year < 243                    ? 2
                                                                      : 3;

        std::size_t c = 0;
        frame.cols[c++].push_back(base_ts + hours * 3600.0);
        frame.cols[c++].push_back(power);
        frame.cols[c++].push_back(temp);
        frame.cols[c++].push_back(humidity);
        frame.cols[c++].push_back(wind);
        frame.cols[c++].push_back(visibility);
        frame.cols[c++].push_back(pressure);
        frame.cols[c++].push_back(ceiling);
        frame.cols[c++].push_back(lat[loc]);
        frame.cols[c++].push_back(lon[loc]);
        frame.cols[c++].push_back(alt[loc]);
        frame.cols[c++].push_back(static_cast<double>(loc));
        frame.cols[c++].push_back(static_cast<double>(season_idx));
    }
    return frame;
}

} // namespace deepts
