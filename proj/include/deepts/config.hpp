#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "deepts/analysis.hpp"
#include "deepts/data.hpp"
#include "deepts/errors.hpp"
#include "deepts/models.hpp"
#include "deepts/regularization.hpp"
#include "deepts/report.hpp"
#include "deepts/training.hpp"

namespace deepts {

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

inline double to_double(const std::string& key, const std::string& v) {
    char* end = nullptr;
    const double d = std::strtod(v.c_str(), &end);
    if (end != v.c_str() + v.size() || v.empty()) {
        throw ConfigError("config: " + key + " expects a number, got '" + v + "'");
    }
    return d;
}

inline long long to_int(const std::string& key, const std::string& v) {
    const double d = to_double(key, v);
    const auto i = static_cast<long long>(d);
    if (static_cast<double>(i) != d) throw ConfigError("config: " + key + " expects an integer");
    return i;
}

inline bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true") return true;
    if (v == "false") return false;
    throw ConfigError("config: " + key + " expects true or false");
}

} // namespace detail

/// Full run configuration. Built from a commented `key = value` file
/// (grammar in the README); every key is validated before any work starts
/// and unknown keys are rejected.
struct RunConfig {
    // dataset
    std::string data;   // empty or "synth" -> synthetic data
    std::string schema; // schema JSON path, required for CSV datasets
    SynthConfig synth;

    // grid
    std::vector<ModelKind> models{kAllModelKinds.begin(), kAllModelKinds.end()};
    std::vector<RegimeId> regimes{kAllRegimes.begin(), kAllRegimes.end()};
    std::vector<double> ratios{0.1, 0.2, 0.3, 0.4, 0.5};

    // windowing
    std::size_t lookback = 24;
    std::size_t horizon = 1;

    // run control
    std::uint64_t seed = 42;
    std::string out = "out";
    unsigned workers = 1;
    TimingMode timing = TimingMode::Wall;
    bool shuffle_splits = false;

    // overfit criterion
    OverfitCriterion criterion;

    // regime knobs
    double lambda = 1e-4;
    int patience = 10;
    double min_delta = 1e-4;
    double dropout = 0.10;

    // optimizer / loop
    TrainConfig train;

    // topology
    double ae_beta = 0.5;
    std::vector<std::size_t> hidden_global;
    std::array<std::vector<std::size_t>, 7> hidden_by_kind{};
    std::size_t conv_filters = 32;
    std::size_t conv_width = 3;
    std::size_t conv_stride = 1;
    std::size_t pool_window = 2;

    void apply(const std::string& key, const std::string& value);
    void validate() const;

    static RunConfig from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file: " + path);
        RunConfig cfg;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            line = detail::trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos) {
                throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
            }
            const std::string key = detail::trim(line.substr(0, eq));
            const std::string value = detail::trim(line.substr(eq + 1));
            try {
                cfg.apply(key, value);
            } catch (const ConfigError& e) {
                throw ConfigError(path + ":" + std::to_string(lineno) + ": " + e.what());
            }
        }
        cfg.validate();
        return cfg;
    }

    /// Canonical serialization of every effective setting; identical configs
    /// fingerprint identically regardless of file formatting.
    std::string canonical() const {
        std::ostringstream os;
        os.precision(17);
        os << "data=" << data << ";schema=" << schema << ";synth.n=" << synth.n
           << ";synth.seed=" << synth.seed << ";synth.locations=" << synth.locations
           << ";synth.noise=" << synth.noise << ";models=";
        for (auto k : models) os << model_kind_id(k) << ' ';
        os << ";regimes=";
        for (auto r : regimes) os << regime_id_str(r) << ' ';
        os << ";ratios=";
        for (double r : ratios) os << r << ' ';
        os << ";lookback=" << lookback << ";horizon=" << horizon << ";seed=" << seed
           << ";workers=*;timing=" << (timing == TimingMode::Wall ? "wall" : "fixed")
           << ";shuffle_splits=" << shuffle_splits << ";overfit.mode="
           << criterion_mode_str(criterion.mode) << ";overfit.tau=" << criterion.tau
           << ";overfit.k=" << criterion.k << ";regime.lambda=" << lambda
           << ";regime.patience=" << patience << ";regime.min_delta=" << min_delta
           << ";regime.dropout=" << dropout << ";train.max_epochs=" << train.max_epochs
           << ";train.batch_size=" << train.batch_size
           << ";train.learning_rate=" << train.learning_rate << ";train.beta1=" << train.adam_beta1
           << ";train.beta2=" << train.adam_beta2 << ";train.epsilon=" << train.adam_epsilon
           << ";train.loss=" << (train.loss == TrainLoss::Mse ? "mse" : "huber")
           << ";train.huber_delta=" << train.huber_delta << ";model.ae_beta=" << ae_beta
           << ";model.conv_filters=" << conv_filters << ";model.conv_width=" << conv_width
           << ";model.conv_stride=" << conv_stride << ";model.pool_window=" << pool_window
           << ";model.hidden=";
        for (auto h : hidden_global) os << h << ' ';
        for (std::size_t i = 0; i < hidden_by_kind.size(); ++i) {
            if (hidden_by_kind[i].empty()) continue;
            os << ";model.hidden." << model_kind_id(static_cast<ModelKind>(i)) << "=";
            for (auto h : hidden_by_kind[i]) os << h << ' ';
        }
        return os.str();
    }

    /// 16-hex-digit FNV-1a fingerprint of the canonical form. Worker count
    /// is excluded: it must never change results.
    std::string fingerprint() const {
        const std::uint64_t h = fnv1a64(canonical());
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
        return buf;
    }

    BenchSettings to_settings() const {
        BenchSettings s;
        s.lookback = lookback;
        s.horizon = horizon;
        s.base_seed = seed;
        s.train = train;
        s.train.timing = timing;
        s.lambda = lambda;
        s.patience = patience;
        s.min_delta = min_delta;
        s.dropout_rate = dropout;
        s.ae_beta = ae_beta;
        s.hidden_global = hidden_global;
        s.hidden_by_kind = hidden_by_kind;
        s.conv_filters = conv_filters;
        s.conv_width = conv_width;
        s.conv_stride = conv_stride;
        s.pool_window = pool_window;
        s.criterion = criterion;
        s.shuffle_splits = shuffle_splits;
        s.workers = workers;
        s.config_fingerprint = fingerprint();
        return s;
    }

    bool uses_synthetic_data() const { return data.empty() || data == "synth"; }

    SeriesFrame load_frame() const {
        if (uses_synthetic_data()) return synthesize(synth);
        if (schema.empty()) throw ConfigError("config: schema path required for CSV datasets");
        return load_csv(data, load_schema(schema));
    }
};

inline void RunConfig::apply(const std::string& key, const std::string& value) {
    using detail::split_list;
    using detail::to_bool;
    using detail::to_double;
    using detail::to_int;

    auto positive_size = [&](const char* what) {
        const long long v = to_int(key, value);
        if (v < 1) throw ConfigError(std::string("config: ") + what + " must be positive");
        return static_cast<std::size_t>(v);
    };
    auto hidden_list = [&]() {
        std::vector<std::size_t> out;
        for (const auto& item : split_list(value)) {
            const long long v = to_int(key, item);
            if (v < 1) throw ConfigError("config: hidden sizes must be positive");
            out.push_back(static_cast<std::size_t>(v));
        }
        return out;
    };

    if (key == "data") {
        data = value;
    } else if (key == "schema") {
        schema = value;
    } else if (key == "synth.n") {
        synth.n = positive_size("synth.n");
    } else if (key == "synth.seed") {
        synth.seed = static_cast<std::uint64_t>(to_int(key, value));
    } else if (key == "synth.locations") {
        synth.locations = positive_size("synth.locations");
    } else if (key == "synth.noise") {
        synth.noise = to_double(key, value);
        if (synth.noise < 0.0) throw ConfigError("config: synth.noise must be non-negative");
    } else if (key == "models") {
        models.clear();
        for (const auto& id : split_list(value)) models.push_back(parse_model_kind(id));
    } else if (key == "regimes") {
        regimes.clear();
        for (const auto& id : split_list(value)) regimes.push_back(parse_regime_id(id));
    } else if (key == "ratios") {
        ratios.clear();
        for (const auto& r : split_list(value)) ratios.push_back(to_double(key, r));
    } else if (key == "lookback") {
        lookback = positive_size("lookback");
    } else if (key == "horizon") {
        horizon = positive_size("horizon");
    } else if (key == "seed") {
        seed = static_cast<std::uint64_t>(to_int(key, value));
    } else if (key == "out") {
        out = value;
    } else if (key == "workers") {
        workers = static_cast<unsigned>(positive_size("workers"));
    } else if (key == "timing") {
        if (value == "wall") {
            timing = TimingMode::Wall;
        } else if (value == "fixed") {
            timing = TimingMode::Fixed;
        } else {
            throw ConfigError("config: timing must be wall or fixed");
        }
    } else if (key == "shuffle_splits") {
        shuffle_splits = to_bool(key, value);
    } else if (key == "overfit.tau") {
        criterion.tau = to_double(key, value);
    } else if (key == "overfit.mode") {
        criterion.mode = parse_criterion_mode(value);
    } else if (key == "overfit.k") {
        criterion.k = static_cast<int>(to_int(key, value));
    } else if (key == "regime.lambda") {
        lambda = to_double(key, value);
        if (lambda < 0.0) throw ConfigError("config: regime.lambda must be non-negative");
    } else if (key == "regime.patience") {
        patience = static_cast<int>(positive_size("regime.patience"));
    } else if (key == "regime.min_delta") {
        min_delta = to_double(key, value);
        if (min_delta < 0.0) throw ConfigError("config: regime.min_delta must be non-negative");
    } else if (key == "regime.dropout") {
        dropout = to_double(key, value);
        if (dropout < 0.0 || dropout >= 1.0) {
            throw ConfigError("config: regime.dropout must lie in [0, 1)");
        }
    } else if (key == "train.max_epochs") {
        train.max_epochs = static_cast<int>(positive_size("train.max_epochs"));
    } else if (key == "train.batch_size") {
        train.batch_size = positive_size("train.batch_size");
    } else if (key == "train.learning_rate") {
        train.learning_rate = to_double(key, value);
    } else if (key == "train.beta1") {
        train.adam_beta1 = to_double(key, value);
    } else if (key == "train.beta2") {
        train.adam_beta2 = to_double(key, value);
    } else if (key == "train.epsilon") {
        train.adam_epsilon = to_double(key, value);
    } else if (key == "train.loss") {
        if (value == "mse") {
            train.loss = TrainLoss::Mse;
        } else if (value == "huber") {
            train.loss = TrainLoss::Huber;
        } else {
            throw ConfigError("config: train.loss must be mse or huber");
        }
    } else if (key == "train.huber_delta") {
        train.huber_delta = to_double(key, value);
    } else if (key == "model.ae_beta") {
        ae_beta = to_double(key, value);
        if (ae_beta < 0.0) throw ConfigError("config: model.ae_beta must be non-negative");
    } else if (key == "model.hidden") {
        hidden_global = hidden_list();
    } else if (key.rfind("model.hidden.", 0) == 0) {
        const ModelKind kind = parse_model_kind(key.substr(13));
        hidden_by_kind[static_cast<std::size_t>(kind)] = hidden_list();
    } else if (key == "model.conv_filters") {
        conv_filters = positive_size("model.conv_filters");
    } else if (key == "model.conv_width") {
        conv_width = positive_size("model.conv_width");
    } else if (key == "model.conv_stride") {
        conv_stride = positive_size("model.conv_stride");
    } else if (key == "model.pool_window") {
        pool_window = positive_size("model.pool_window");
    } else {
        throw ConfigError("config: unknown key '" + key + "'");
    }
}

inline void RunConfig::validate() const {
    if (models.empty()) throw ConfigError("config: models list is empty");
    if (regimes.empty()) throw ConfigError("config: regimes list is empty");
    if (ratios.empty()) throw ConfigError("config: ratios list is empty");
    for (double r : ratios) {
        if (!(r > 0.0) || r > 0.5) throw ConfigError("config: ratios must lie in (0, 0.5]");
    }
    try {
        train.validate();
        criterion.validate();
    } catch (const ValueError& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (!uses_synthetic_data() && schema.empty()) {
        throw ConfigError("config: schema path required when data is a CSV file");
    }
}

} // namespace deepts
