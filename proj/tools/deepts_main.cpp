// deepts command-line interface: dataset statistics, split planning,
// synthetic data generation, single-cell training and the full benchmark
// grid. Exit codes: 0 success, 2 usage/config/ingestion error, 3 runtime
// training failure.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "deepts/deepts.hpp"

namespace fs = std::filesystem;
using namespace deepts;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitTrainFailure = 3;

struct CliOverrides {
    std::optional<std::string> config_path;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> workers;
    std::optional<std::string> out;
    std::optional<double> ratio;
    std::optional<std::string> model;
    std::optional<std::string> regime;
    std::optional<double> tau;
};

/// Precedence: built-in defaults < config file < environment < flags.
RunConfig effective_config(const CliOverrides& ov) {
    RunConfig cfg;
    if (ov.config_path) cfg = RunConfig::from_file(*ov.config_path);
    if (const char* env = std::getenv("DEEPTS_SEED")) {
        cfg.apply("seed", env);
    }
    if (const char* env = std::getenv("DEEPTS_WORKERS")) {
        cfg.apply("workers", env);
    }
    if (ov.seed) cfg.seed = *ov.seed;
    if (ov.workers) cfg.workers = *ov.workers;
    if (ov.out) cfg.out = *ov.out;
    if (ov.tau) cfg.criterion.tau = *ov.tau;
    if (ov.ratio) cfg.ratios = {*ov.ratio};
    if (ov.model) cfg.models = {parse_model_kind(*ov.model)};
    if (ov.regime) cfg.regimes = {parse_regime_id(*ov.regime)};
    cfg.validate();
    return cfg;
}

void print_stats(const StatsTable& table) {
    std::printf("%-22s %14s %14s %14s %12s %12s\n", "column", "mean", "median", "std_dev",
                "skewness", "kurtosis");
    for (const auto& c : table.columns) {
        std::printf("%-22s %14.4f %14.4f %14.4f ", c.name.c_str(), c.mean, c.median, c.std_dev);
        if (c.skewness) {
            std::printf("%12.4f %12.4f\n", *c.skewness, *c.kurtosis);
        } else {
            std::printf("%12s %12s\n", "n/a", "n/a");
        }
    }
}

void write_stats_csv(const StatsTable& table, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out.precision(17);
    out << "column,mean,median,std_dev,skewness,kurtosis\n";
    for (const auto& c : table.columns) {
        out << csv_escape(c.name) << ',' << c.mean << ',' << c.median << ',' << c.std_dev << ',';
        if (c.skewness) out << *c.skewness;
        out << ',';
        if (c.kurtosis) out << *c.kurtosis;
        out << '\n';
    }
}

int cmd_stats(const std::string& data_path, const std::string& schema_path,
              const std::string& out_dir) {
    const Schema schema = load_schema(schema_path);
    const SeriesFrame frame = load_csv(data_path, schema);
    if (frame.dropped_rows > 0) {
        std::fprintf(stderr, "note: dropped %zu unparseable row(s)\n", frame.dropped_rows);
    }
    const StatsTable table = describe(frame);
    print_stats(table);
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_stats_csv(table, fs::path(out_dir) / "stats.csv");
        std::printf("wrote %s\n", (fs::path(out_dir) / "stats.csv").string().c_str());
    }
    return kExitOk;
}

int cmd_split_plan(std::size_t n, double ratio) {
    const SplitPlan p = plan_splits(n, ratio);
    std::printf("train %zu, val %zu, test %zu\n", p.n_train, p.n_val, p.n_test);
    return kExitOk;
}

int cmd_synth(const SynthConfig& sc, const std::string& out_csv, const std::string& schema_out) {
    const SeriesFrame frame = synthesize(sc);
    save_csv(frame, out_csv);
    std::printf("wrote %s (%zu rows)\n", out_csv.c_str(), frame.n_rows());
    if (!schema_out.empty()) {
        save_schema(frame.schema, schema_out);
        std::printf("wrote %s\n", schema_out.c_str());
    }
    return kExitOk;
}

int cmd_train(const RunConfig& cfg) {
    if (cfg.models.size() != 1 || cfg.regimes.size() != 1 || cfg.ratios.size() != 1) {
        throw ConfigError("train: exactly one model, regime and ratio required "
                          "(use --model/--regime/--ratio or narrow the config)");
    }
    const ModelKind kind = cfg.models[0];
    const RegimeId regime_id = cfg.regimes[0];
    const double ratio = cfg.ratios[0];

    SeriesFrame raw = cfg.load_frame();
    SeriesFrame frame = encode_categoricals(raw);
    BenchSettings settings = cfg.to_settings();
    if (settings.shuffle_splits) {
        SeededRng shuffle_rng(settings.base_seed, 0x5F1E);
        frame = shuffle_rows(frame, shuffle_rng);
    }
    const RatioData rd = prepare_ratio(frame, ratio, settings);

    const RegimeSpec regime = regime_spec(regime_id, settings.lambda, settings.patience,
                                          settings.min_delta, settings.dropout_rate);
    const ModelSpec spec = model_spec_for(kind, rd, regime, settings);
    const std::uint64_t cell_seed = cell_seed_for(settings.base_seed, kind, regime_id, ratio);
    SeededRng build_rng(cell_seed, 0xB11D);
    Model model = Model::build(spec, build_rng);
    TrainConfig tc = settings.train;
    tc.seed = cell_seed;

    TrainingHistory hist;
    try {
        hist = train(model, rd.windows.train, rd.windows.val, regime, tc, &rd.scaler);
    } catch (const TrainError& e) {
        std::fprintf(stderr, "training failed: %s\n", e.what());
        return kExitTrainFailure;
    }

    EvaluationReport report = evaluate(model, rd.windows, &rd.scaler, tc.huber_delta);
    report.kind = kind;
    report.regime = regime_id;
    report.test_ratio = ratio;
    report.history = std::move(hist);
    report.train_wall_time = report.history.total_wall_time;
    report.flags = detect_overfit(report, settings.criterion);

    fs::create_directories(cfg.out);
    const fs::path dir(cfg.out);
    {
        std::ofstream out(dir / "history.jsonl");
        if (!out) throw IoError("cannot write history.jsonl");
        for (const auto& rec : report.history.records) out << to_json(rec).dump() << '\n';
    }
    save_checkpoint(model.params(), (dir / "model.ckpt").string());
    {
        std::ofstream out(dir / "report.json");
        if (!out) throw IoError("cannot write report.json");
        ordered_json j;
        j["format"] = "deepts-report-v1";
        j["config_fingerprint"] = settings.config_fingerprint;
        j["report"] = to_json(report);
        out << j.dump(2) << '\n';
    }
    std::printf("cell %s/%s/%s: %d epoch(s)%s, train RMSE %.6f, test RMSE %.6f\n",
                model_kind_id(kind).c_str(), regime_id_str(regime_id).c_str(),
                format_ratio_percent(ratio).c_str(),
                static_cast<int>(report.history.records.size()),
                report.history.stopped_early ? " (early stop)" : "", report.train.rmse,
                report.test.rmse);
    std::printf("wrote %s, %s, %s\n", (dir / "history.jsonl").string().c_str(),
                (dir / "model.ckpt").string().c_str(), (dir / "report.json").string().c_str());
    return kExitOk;
}

int cmd_bench(const RunConfig& cfg) {
    const SeriesFrame raw = cfg.load_frame();
    const BenchSettings settings = cfg.to_settings();
    const BenchmarkMatrix matrix = run_matrix(cfg.models, cfg.regimes, cfg.ratios, raw, settings);
    render(matrix, cfg.out);
    std::size_t failed = 0;
    for (const auto& c : matrix.cells) {
        if (!c.ok) {
            ++failed;
            std::fprintf(stderr, "cell %s/%s/%s failed: %s\n", model_kind_id(c.kind).c_str(),
                         regime_id_str(c.regime).c_str(), format_ratio_percent(c.ratio).c_str(),
                         c.error.c_str());
        }
    }
    std::printf("benchmark: %zu cell(s), %zu failed; reports in %s\n", matrix.cells.size(), failed,
                cfg.out.c_str());
    return kExitOk;
}

int cmd_report(const std::string& matrix_path, const std::string& out_dir) {
    const BenchmarkMatrix matrix = load_matrix(matrix_path);
    render(matrix, out_dir);
    std::printf("re-rendered %zu cell(s) into %s\n", matrix.cells.size(), out_dir.c_str());
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"deepts: deep-learning forecasting benchmark"};
    app.require_subcommand(1);

    CliOverrides ov;
    std::string data_path, schema_path, out_dir, matrix_path, schema_out;
    std::size_t plan_n = 0;
    double plan_ratio = 0.0;
    SynthConfig synth_cfg;

    auto* stats = app.add_subcommand("stats", "descriptive statistics of a dataset");
    stats->add_option("--data", data_path, "dataset CSV path")->required();
    stats->add_option("--schema", schema_path, "schema JSON path")->required();
    stats->add_option("--out", out_dir, "directory for stats.csv");

    auto* split = app.add_subcommand("split-plan", "train/val/test counts for a split ratio");
    split->add_option("--n", plan_n, "total sample count")->required();
    split->add_option("--ratio", plan_ratio, "test ratio in (0, 0.5]")->required();

    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
    synth->add_option("--n", synth_cfg.n, "row count");
    synth->add_option("--seed", synth_cfg.seed, "generator seed");
    synth->add_option("--locations", synth_cfg.locations, "number of sites");
    synth->add_option("--noise", synth_cfg.noise, "target noise scale");
    synth->add_option("--out", data_path, "output CSV path")->required();
    synth->add_option("--schema-out", schema_out, "also write the matching schema JSON");

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option_function<std::string>(
            "--config", [&](const std::string& v) { ov.config_path = v; }, "run config file");
        cmd->add_option_function<std::uint64_t>(
            "--seed", [&](std::uint64_t v) { ov.seed = v; }, "base seed override");
        cmd->add_option_function<unsigned>(
            "--workers", [&](unsigned v) { ov.workers = v; }, "worker thread count");
        cmd->add_option_function<std::string>(
            "--out", [&](const std::string& v) { ov.out = v; }, "output directory");
        cmd->add_option_function<double>(
            "--tau", [&](double v) { ov.tau = v; }, "overfit threshold override");
    };

    auto* train_cmd = app.add_subcommand("train", "train and evaluate one benchmark cell");
    add_common(train_cmd);
    train_cmd->add_option_function<std::string>(
        "--model", [&](const std::string& v) { ov.model = v; }, "model kind");
    train_cmd->add_option_function<std::string>(
        "--regime", [&](const std::string& v) { ov.regime = v; }, "regularization regime");
    train_cmd->add_option_function<double>(
        "--ratio", [&](double v) { ov.ratio = v; }, "test split ratio");

    auto* bench = app.add_subcommand("bench", "run the full benchmark grid");
    add_common(bench);

    auto* report = app.add_subcommand("report", "re-render report files from a matrix JSON");
    report->add_option("--matrix", matrix_path, "matrix.json path")->required();
    report->add_option("--out", out_dir, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (stats->parsed()) return cmd_stats(data_path, schema_path, out_dir);
        if (split->parsed()) return cmd_split_plan(plan_n, plan_ratio);
        if (synth->parsed()) return cmd_synth(synth_cfg, data_path, schema_out);
        if (train_cmd->parsed()) return cmd_train(effective_config(ov));
        if (bench->parsed()) return cmd_bench(effective_config(ov));
        if (report->parsed()) return cmd_report(matrix_path, out_dir);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const ValueError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "runtime failure: %s\n", e.what());
        return kExitTrainFailure;
    }
    return kExitOk;
}
