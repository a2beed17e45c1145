#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "deepts/analysis.hpp"
#include "deepts/errors.hpp"

namespace deepts {

using ordered_json = nlohmann::ordered_json;

inline std::string format_ratio_percent(double ratio) {
    return std::to_string(std::lround(ratio * 100.0)) + "%";
}

/// RFC-4180 field quoting.
inline std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') out += '"';
        out += ch;
    }
    out += '"';
    return out;
}

inline std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

/// Every emitted file carries the config fingerprint and the overfit
/// threshold so results stay traceable to their run configuration.
inline std::string report_comment(const BenchmarkMatrix& m) {
    return "# deepts-report config_fingerprint=" + m.config_fingerprint +
           " tau=" + std::to_string(m.criterion.tau);
}

// ---------------------------------------------------------------------------
// JSON serialization (numbers round-trip exactly)
// ---------------------------------------------------------------------------

inline ordered_json to_json(const MetricSet& m) {
    ordered_json j;
    j["rmse"] = m.rmse;
    j["mse"] = m.mse;
    j["huber"] = m.huber;
    j["mae"] = m.mae;
    j["msle"] = m.msle.has_value() ? ordered_json(*m.msle) : ordered_json(nullptr);
    j["r2"] = m.r2;
    return j;
}

inline MetricSet metric_set_from_json(const ordered_json& j) {
    MetricSet m;
    m.rmse = j.at("rmse").get<double>();
    m.mse = j.at("mse").get<double>();
    m.huber = j.at("huber").get<double>();
    m.mae = j.at("mae").get<double>();
    if (!j.at("msle").is_null()) m.msle = j.at("msle").get<double>();
    m.r2 = j.at("r2").get<double>();
    return m;
}

inline ordered_json to_json(const DiffSet& d) {
    ordered_json j;
    j["rmse_diff"] = d.rmse_diff;
    j["mse_diff"] = d.mse_diff;
    j["loss_diff"] = d.loss_diff;
    j["mae_diff"] = d.mae_diff;
    j["msle_diff"] = d.msle_diff.has_value() ? ordered_json(*d.msle_diff) : ordered_json(nullptr);
    j["r2s_diff"] = d.r2s_diff;
    return j;
}

inline DiffSet diff_set_from_json(const ordered_json& j) {
    DiffSet d;
    d.rmse_diff = j.at("rmse_diff").get<double>();
    d.mse_diff = j.at("mse_diff").get<double>();
    d.loss_diff = j.at("loss_diff").get<double>();
    d.mae_diff = j.at("mae_diff").get<double>();
    if (!j.at("msle_diff").is_null()) d.msle_diff = j.at("msle_diff").get<double>();
    d.r2s_diff = j.at("r2s_diff").get<double>();
    return d;
}

inline ordered_json to_json(const OverfitFlags& f) {
    ordered_json j;
    for (std::size_t i = 0; i < kAllMetrics.size(); ++i) {
        j[metric_key(kAllMetrics[i])] = f[i].has_value() ? ordered_json(*f[i]) : ordered_json(nullptr);
    }
    return j;
}

inline OverfitFlags flags_from_json(const ordered_json& j) {
    OverfitFlags f{};
    for (std::size_t i = 0; i < kAllMetrics.size(); ++i) {
        const auto& v = j.at(metric_key(kAllMetrics[i]));
        if (!v.is_null()) f[i] = v.get<bool>();
    }
    return f;
}

inline ordered_json to_json(const EpochRecord& r) {
    ordered_json j;
    j["epoch"] = r.epoch;
    j["train"] = to_json(r.train);
    j["val"] = to_json(r.val);
    j["penalty"] = r.penalty_value;
    j["wall_time_seconds"] = r.wall_time_seconds;
    return j;
}

inline EpochRecord epoch_record_from_json(const ordered_json& j) {
    EpochRecord r;
    r.epoch = j.at("epoch").get<int>();
    r.train = metric_set_from_json(j.at("train"));
    r.val = metric_set_from_json(j.at("val"));
    r.penalty_value = j.at("penalty").get<double>();
    r.wall_time_seconds = j.at("wall_time_seconds").get<double>();
    return r;
}

inline ordered_json to_json(const TrainingHistory& h) {
    ordered_json j;
    j["stopped_early"] = h.stopped_early;
    j["best_epoch"] = h.best_epoch;
    j["total_wall_time"] = h.total_wall_time;
    j["records"] = ordered_json::array();
    for (const auto& r : h.records) j["records"].push_back(to_json(r));
    return j;
}

inline TrainingHistory history_from_json(const ordered_json& j) {
    TrainingHistory h;
    h.stopped_early = j.at("stopped_early").get<bool>();
    h.best_epoch = j.at("best_epoch").get<int>();
    h.total_wall_time = j.at("total_wall_time").get<double>();
    for (const auto& rj : j.at("records")) h.records.push_back(epoch_record_from_json(rj));
    return h;
}

inline ordered_json to_json(const EvaluationReport& r) {
    ordered_json j;
    j["model"] = model_kind_id(r.kind);
    j["regime"] = regime_id_str(r.regime);
    j["ratio"] = r.test_ratio;
    j["param_count"] = r.param_count;
    j["train_wall_time"] = r.train_wall_time;
    j["train"] = to_json(r.train);
    j["test"] = to_json(r.test);
    j["diff"] = to_json(r.diff);
    j["flags"] = to_json(r.flags);
    j["history"] = to_json(r.history);
    return j;
}

inline EvaluationReport report_from_json(const ordered_json& j) {
    EvaluationReport r;
    r.kind = parse_model_kind(j.at("model").get<std::string>());
    r.regime = parse_regime_id(j.at("regime").get<std::string>());
    r.test_ratio = j.at("ratio").get<double>();
    r.param_count = j.at("param_count").get<std::size_t>();
    r.train_wall_time = j.at("train_wall_time").get<double>();
    r.train = metric_set_from_json(j.at("train"));
    r.test = metric_set_from_json(j.at("test"));
    r.diff = diff_set_from_json(j.at("diff"));
    r.flags = flags_from_json(j.at("flags"));
    r.history = history_from_json(j.at("history"));
    return r;
}

inline std::string criterion_mode_str(OverfitCriterion::Mode m) {
    return m == OverfitCriterion::Mode::RelativeGap ? "relative-gap" : "divergence";
}

inline OverfitCriterion::Mode parse_criterion_mode(const std::string& s) {
    if (s == "relative-gap") return OverfitCriterion::Mode::RelativeGap;
    if (s == "divergence") return OverfitCriterion::Mode::Divergence;
    throw ValueError("unknown overfit criterion mode: " + s);
}

inline ordered_json matrix_to_json(const BenchmarkMatrix& m) {
    ordered_json j;
    j["format"] = "deepts-matrix-v1";
    j["config_fingerprint"] = m.config_fingerprint;
    j["base_seed"] = m.base_seed;
    j["criterion"] = {{"mode", criterion_mode_str(m.criterion.mode)},
                      {"tau", m.criterion.tau},
                      {"epsilon", m.criterion.epsilon},
                      {"k", m.criterion.k}};
    j["cells"] = ordered_json::array();
    for (const auto& c : m.cells) {
        ordered_json cj;
        cj["model"] = model_kind_id(c.kind);
        cj["regime"] = regime_id_str(c.regime);
        cj["ratio"] = c.ratio;
        cj["cell_seed"] = c.cell_seed;
        cj["ok"] = c.ok;
        cj["error"] = c.ok ? ordered_json(nullptr) : ordered_json(c.error);
        cj["report"] = c.ok ? to_json(c.report) : ordered_json(nullptr);
        j["cells"].push_back(std::move(cj));
    }
    return j;
}

inline BenchmarkMatrix matrix_from_json(const ordered_json& j) {
    if (!j.contains("format") || j.at("format").get<std::string>() != "deepts-matrix-v1") {
        throw IoError("not a deepts matrix file");
    }
    BenchmarkMatrix m;
    m.config_fingerprint = j.at("config_fingerprint").get<std::string>();
    m.base_seed = j.at("base_seed").get<std::uint64_t>();
    m.criterion.mode = parse_criterion_mode(j.at("criterion").at("mode").get<std::string>());
    m.criterion.tau = j.at("criterion").at("tau").get<double>();
    m.criterion.epsilon = j.at("criterion").at("epsilon").get<double>();
    m.criterion.k = j.at("criterion").at("k").get<int>();
    for (const auto& cj : j.at("cells")) {
        BenchCell c;
        c.kind = parse_model_kind(cj.at("model").get<std::string>());
        c.regime = parse_regime_id(cj.at("regime").get<std::string>());
        c.ratio = cj.at("ratio").get<double>();
        c.cell_seed = cj.at("cell_seed").get<std::uint64_t>();
        c.ok = cj.at("ok").get<bool>();
        if (!cj.at("error").is_null()) c.error = cj.at("error").get<std::string>();
        if (c.ok) c.report = report_from_json(cj.at("report"));
        m.cells.push_back(std::move(c));
    }
    return m;
}

inline BenchmarkMatrix load_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open matrix file: " + path);
    ordered_json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("matrix parse error: " + std::string(e.what()));
    }
    return matrix_from_json(j);
}

// ---------------------------------------------------------------------------
// SVG learning curves
// ---------------------------------------------------------------------------

/// Minimal SVG 1.1 line chart: train vs validation RMSE per epoch.
inline void write_learning_curve_svg(const std::filesystem::path& path, const std::string& title,
                                     const std::string& fingerprint,
                                     const std::vector<double>& train_vals,
                                     const std::vector<double>& val_vals) {
    const double width = 640, height = 400;
    const double ml = 60, mr = 20, mt = 40, mb = 40;
    const double pw = width - ml - mr, ph = height - mt - mb;
    const std::size_t n = train_vals.size();

    double lo = train_vals.empty() ? 0.0 : train_vals[0];
    double hi = lo;
    for (double v : train_vals) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    for (double v : val_vals) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (!(hi > lo)) hi = lo + 1.0;

    auto x_of = [&](std::size_t i) {
        return n > 1 ? ml + pw * static_cast<double>(i) / static_cast<double>(n - 1) : ml + pw / 2;
    };
    auto y_of = [&](double v) { return mt + ph * (1.0 - (v - lo) / (hi - lo)); };
    auto polyline = [&](const std::vector<double>& vals, const char* color, const char* dash) {
        std::string pts;
        for (std::size_t i = 0; i < vals.size(); ++i) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.2f,%.2f ", x_of(i), y_of(vals[i]));
            pts += buf;
        }
        return "  <polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"2\"" +
               (dash[0] ? " stroke-dasharray=\"" + std::string(dash) + "\"" : "") + " points=\"" +
               pts + "\"/>\n";
    };

    std::ofstream out = open_out(path);
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width
        << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n"
        << "  <desc>config_fingerprint=" << fingerprint << "</desc>\n"
        << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "  <text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
        << title << "</text>\n"
        << "  <line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw << "\" y2=\""
        << mt + ph << "\" stroke=\"black\"/>\n"
        << "  <line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << mt + ph
        << "\" stroke=\"black\"/>\n";
    char buf[128];
    std::snprintf(buf, sizeof buf, "%.4g", hi);
    out << "  <text x=\"" << ml - 6 << "\" y=\"" << mt + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << buf << "</text>\n";
    std::snprintf(buf, sizeof buf, "%.4g", lo);
    out << "  <text x=\"" << ml - 6 << "\" y=\"" << mt + ph + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << buf << "</text>\n"
        << "  <text x=\"" << ml + pw / 2 << "\" y=\"" << height - 8
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">epoch (1.."
        << n << ")</text>\n";
    out << polyline(train_vals, "#e8a000", "");
    out << polyline(val_vals, "#1f77b4", "6,4");
    out << "  <text x=\"" << ml + pw - 160 << "\" y=\"" << mt + 16
        << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#e8a000\">train RMSE</text>\n"
        << "  <text x=\"" << ml + pw - 160 << "\" y=\"" << mt + 32
        << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#1f77b4\">validation RMSE</text>\n"
        << "</svg>\n";
}

// ---------------------------------------------------------------------------
// render: the five report artifacts
// ---------------------------------------------------------------------------

inline std::string cell_file_stem(const BenchCell& c) {
    return "curves_" + model_kind_id(c.kind) + "_" + regime_id_str(c.regime) + "_" +
           std::to_string(std::lround(c.ratio * 100.0));
}

/// Emits the benchmark artifacts into out_dir:
///   overfit_table.csv   rows = models, columns = error metrics, cells = the
///                       ratios at which the baseline run was flagged
///   best_regime.csv     rows = (model, ratio), columns = error metrics,
///                       cells = regime(s) with the smallest overfit gap
///   curves_*.csv/.svg   per-cell learning-curve data and chart
///   time_vs_diff.csv    training wall time against every diff component
///   matrix.json         the full matrix; parses back bit-exactly
inline void render(const BenchmarkMatrix& matrix, const std::string& out_dir) {
    if (matrix.cells.empty()) throw ValueError("render: empty matrix");
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    const fs::path dir(out_dir);
    if (!fs::is_directory(dir)) throw IoError("cannot create output directory " + out_dir);

    std::vector<ModelKind> kinds;
    std::vector<double> ratios;
    for (const auto& c : matrix.cells) {
        if (std::find(kinds.begin(), kinds.end(), c.kind) == kinds.end()) kinds.push_back(c.kind);
        if (std::find_if(ratios.begin(), ratios.end(), [&](double r) {
                return std::abs(r - c.ratio) < 1e-12;
            }) == ratios.end()) {
            ratios.push_back(c.ratio);
        }
    }
    std::sort(ratios.begin(), ratios.end());

    // (a) overfit table: the baseline-regime reading of the matrix
    {
        std::ofstream out = open_out(dir / "overfit_table.csv");
        out << report_comment(matrix) << "\n";
        out << "Model";
        for (MetricId m : kTableMetrics) out << ',' << csv_escape(metric_label(m));
        out << '\n';
        for (ModelKind k : kinds) {
            out << csv_escape(model_kind_label(k));
            for (MetricId m : kTableMetrics) {
                std::string cell;
                for (double r : ratios) {
                    const BenchCell* c = matrix.find(k, RegimeId::B1, r);
                    if (c == nullptr || !c->ok) continue;
                    const auto idx = static_cast<std::size_t>(
                        std::find(kAllMetrics.begin(), kAllMetrics.end(), m) - kAllMetrics.begin());
                    if (c->report.flags[idx].value_or(false)) {
                        if (!cell.empty()) cell += ", ";
                        cell += format_ratio_percent(r);
                    }
                }
                out << ',' << csv_escape(cell);
            }
            out << '\n';
        }
    }

    // (b) best-regime table
    {
        std::ofstream out = open_out(dir / "best_regime.csv");
        out << report_comment(matrix) << "\n";
        out << "Model,Ratio";
        for (MetricId m : kTableMetrics) out << ',' << csv_escape(metric_label(m));
        out << '\n';
        for (ModelKind k : kinds) {
            for (double r : ratios) {
                bool any = false;
                std::vector<std::string> cells;
                for (MetricId m : kTableMetrics) {
                    const auto ties = best_regime_ties(matrix, k, r, m);
                    std::string cell;
                    for (RegimeId reg : ties) {
                        if (!cell.empty()) cell += ", ";
                        cell += regime_label(reg);
                    }
                    if (!cell.empty()) any = true;
                    cells.push_back(std::move(cell));
                }
                if (!any) continue; // no regularized cells for this row
                out << csv_escape(model_kind_label(k)) << ',' << format_ratio_percent(r);
                for (const auto& cell : cells) out << ',' << csv_escape(cell);
                out << '\n';
            }
        }
    }

    // (c) per-cell learning curves, CSV + SVG
    for (const auto& c : matrix.cells) {
        if (!c.ok) continue;
        const std::string stem = cell_file_stem(c);
        {
            std::ofstream out = open_out(dir / (stem + ".csv"));
            out << report_comment(matrix) << "\n";
            out << "epoch";
            for (MetricId m : kAllMetrics) out << ",train_" << metric_key(m);
            for (MetricId m : kAllMetrics) out << ",val_" << metric_key(m);
            out << ",penalty,wall_time_seconds\n";
            out.precision(17);
            for (const auto& rec : c.report.history.records) {
                out << rec.epoch;
                for (MetricId m : kAllMetrics) {
                    out << ',';
                    const auto v = metric_value(rec.train, m);
                    if (v) out << *v;
                }
                for (MetricId m : kAllMetrics) {
                    out << ',';
                    const auto v = metric_value(rec.val, m);
                    if (v) out << *v;
                }
                out << ',' << rec.penalty_value << ',' << rec.wall_time_seconds << '\n';
            }
        }
        std::vector<double> train_rmse, val_rmse;
        for (const auto& rec : c.report.history.records) {
            train_rmse.push_back(rec.train.rmse);
            val_rmse.push_back(rec.val.rmse);
        }
        write_learning_curve_svg(dir / (stem + ".svg"),
                                 model_kind_label(c.kind) + " / " + regime_label(c.regime) + " / " +
                                     format_ratio_percent(c.ratio),
                                 matrix.config_fingerprint, train_rmse, val_rmse);
    }

    // (d) computing time vs metric diffs
    {
        std::ofstream out = open_out(dir / "time_vs_diff.csv");
        out << report_comment(matrix) << "\n";
        out << "Model,Regime,Ratio,train_wall_time,RMSE_diff,MSE_diff,LOSS_diff,MAE_diff,"
               "MSLE_diff,R2S_diff\n";
        out.precision(17);
        for (const auto& c : matrix.cells) {
            if (!c.ok) continue;
            const DiffSet& d = c.report.diff;
            out << csv_escape(model_kind_label(c.kind)) << ',' << regime_label(c.regime) << ','
                << format_ratio_percent(c.ratio) << ',' << c.report.train_wall_time << ','
                << d.rmse_diff << ',' << d.mse_diff << ',' << d.loss_diff << ',' << d.mae_diff << ',';
            if (d.msle_diff) out << *d.msle_diff;
            out << ',' << d.r2s_diff << '\n';
        }
    }

    // (e) the full matrix as JSON
    {
        std::ofstream out = open_out(dir / "matrix.json");
        out << matrix_to_json(matrix).dump(2) << '\n';
    }
}

} // namespace deepts
