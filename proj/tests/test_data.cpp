#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "deepts/data.hpp"
#include "deepts/numeric.hpp"
#include "oracles.hpp"

using namespace deepts;
namespace fs = std::filesystem;

namespace {

Schema tiny_schema() {
    Schema s;
    ColumnDesc ts{"t", ColumnRole::Timestamp, "", {}};
    ColumnDesc target{"power", ColumnRole::Target, "W", {}};
    ColumnDesc temp{"temp", ColumnRole::NumericFeature, "C", {}};
    ColumnDesc season{"season", ColumnRole::CategoricalFeature, "", {"winter", "spring", "summer", "autumn"}};
    s.columns = {ts, target, temp, season};
    return s;
}

fs::path write_temp(const std::string& name, const std::string& content) {
    const fs::path p = fs::temp_directory_path() / name;
    std::ofstream out(p);
    out << content;
    return p;
}

} // namespace

TEST_CASE("load_csv ingests a fixture and sorts by timestamp") {
    const fs::path p = write_temp("deepts_fixture.csv",
                                  "t,power,temp,season,extra\n"
                                  "30,3.0,13.0,summer,x\n"
                                  "10,1.0,11.0,winter,y\n"
                                  "20,2.0,12.0,spring,z\n");
    const SeriesFrame f = load_csv(p.string(), tiny_schema());
    REQUIRE(f.n_rows() == 3);
    REQUIRE(f.dropped_rows == 0);
    REQUIRE(f.col("t") == std::vector<double>{10, 20, 30});
    REQUIRE(f.col("power") == std::vector<double>{1.0, 2.0, 3.0});
    REQUIRE(f.col("season") == std::vector<double>{0.0, 1.0, 2.0});
    fs::remove(p);
}

TEST_CASE("load_csv drops and counts malformed rows") {
    const fs::path p = write_temp("deepts_malformed.csv",
                                  "t,power,temp,season\n"
                                  "1,1.0,10.0,winter\n"
                                  "2,not_a_number,10.0,winter\n"
                                  "3,3.0,12.0,monsoon\n"
                                  "4,4.0,13.0,autumn\n");
    const SeriesFrame f = load_csv(p.string(), tiny_schema());
    REQUIRE(f.n_rows() == 2);
    REQUIRE(f.dropped_rows == 2);
    fs::remove(p);
}

TEST_CASE("load_csv error contracts: missing file, bad header, no rows") {
    REQUIRE_THROWS_AS(load_csv("/nonexistent/data.csv", tiny_schema()), IoError);
    const fs::path p = write_temp("deepts_badheader.csv", "a,b\n1,2\n");
    REQUIRE_THROWS_AS(load_csv(p.string(), tiny_schema()), IoError);
    fs::remove(p);
    const fs::path p2 = write_temp("deepts_norows.csv",
                                   "t,power,temp,season\nx,y,z,w\n");
    REQUIRE_THROWS_AS(load_csv(p2.string(), tiny_schema()), IoError);
    fs::remove(p2);
}

TEST_CASE("iso timestamps parse to epoch seconds") {
    const fs::path p = write_temp("deepts_iso.csv",
                                  "t,power,temp,season\n"
                                  "2020-01-01 01:00:00,1,1,winter\n"
                                  "2020-01-01 00:00:00,0,0,winter\n");
    const SeriesFrame f = load_csv(p.string(), tiny_schema());
    REQUIRE(f.col("t")[1] - f.col("t")[0] == 3600.0);
    REQUIRE(f.col("t")[0] == 1577836800.0);
    fs::remove(p);
}

TEST_CASE("describe: hand-computed column") {
    const std::vector<double> v{1, 2, 3, 4};
    const ColumnStats s = column_stats("v", v);
    REQUIRE_THAT(s.mean, Catch::Matchers::WithinAbs(2.5, 1e-15));
    REQUIRE_THAT(s.median, Catch::Matchers::WithinAbs(2.5, 1e-15));
    REQUIRE_THAT(s.std_dev, Catch::Matchers::WithinAbs(1.2909944487358056, 1e-12));
    REQUIRE(s.skewness.has_value());
    REQUIRE_THAT(*s.skewness, Catch::Matchers::WithinAbs(0.0, 1e-12));
}

TEST_CASE("describe: constant column marks shape stats undefined") {
    const ColumnStats s = column_stats("c", {7, 7, 7, 7});
    REQUIRE(s.std_dev == 0.0);
    REQUIRE_FALSE(s.skewness.has_value());
    REQUIRE_FALSE(s.kurtosis.has_value());
    REQUIRE_THROWS_AS(column_stats("n", {1.0}), ValueError);
}

TEST_CASE("describe matches the brute-force statistics oracle on 50 random columns") {
    SeededRng rng(808);
    for (int t = 0; t < 50; ++t) {
        const std::size_t n = 3 + rng.below(400);
        std::vector<double> v(n);
        for (auto& x : v) x = rng.uniform(-10.0, 50.0) + 5.0 * rng.normal();
        const ColumnStats got = column_stats("v", v);
        const oracle::Moments want = oracle::moments(v);
        REQUIRE(relative_error(got.mean, want.mean) < 1e-10);
        REQUIRE(relative_error(got.median, want.median) < 1e-10);
        REQUIRE(relative_error(got.std_dev, want.std_dev) < 1e-10);
        REQUIRE(relative_error(*got.skewness, want.skewness) < 1e-10);
        REQUIRE(relative_error(*got.kurtosis, want.kurtosis) < 1e-10);
    }
}

TEST_CASE("plan_splits reproduces the published 21,045-row schedule exactly") {
    struct Row {
        double r;
        std::size_t train, val, test;
    };
    const Row table[] = {{0.1, 17046, 1894, 2105},
                         {0.2, 13469, 3367, 4209},
                         {0.3, 10312, 4419, 6314},
                         {0.4, 7576, 5051, 8418},
                         {0.5, 5261, 5261, 10523}};
    for (const Row& row : table) {
        const SplitPlan p = plan_splits(21045, row.r);
        REQUIRE(p.n_train == row.train);
        REQUIRE(p.n_val == row.val);
        REQUIRE(p.n_test == row.test);
        REQUIRE(p.n_train + p.n_val + p.n_test == 21045);
    }
}

TEST_CASE("plan_splits partitions are contiguous, ordered and exhaustive") {
    SeededRng rng(3);
    for (int t = 0; t < 40; ++t) {
        const std::size_t n = 10 + rng.below(5000);
        const double r = rng.uniform(0.05, 0.5);
        const SplitPlan p = plan_splits(n, r);
        REQUIRE(p.n_train + p.n_val + p.n_test == n);
        REQUIRE(p.train_end() == p.val_begin());
        REQUIRE(p.val_end() == p.test_begin());
        REQUIRE(p.test_end() == n);
    }
    REQUIRE_THROWS_AS(plan_splits(21045, 0.6), ValueError);
    REQUIRE_THROWS_AS(plan_splits(21045, 0.0), ValueError);
    REQUIRE_THROWS_AS(plan_splits(5, 0.3), ValueError);
}

namespace {

SeriesFrame numeric_frame(const std::vector<double>& target, const std::vector<double>& feat) {
    SeriesFrame f;
    ColumnDesc ts{"t", ColumnRole::Timestamp, "", {}};
    ColumnDesc tg{"y", ColumnRole::Target, "", {}};
    ColumnDesc x{"x", ColumnRole::NumericFeature, "", {}};
    f.schema.columns = {ts, tg, x};
    std::vector<double> stamps(target.size());
    for (std::size_t i = 0; i < stamps.size(); ++i) stamps[i] = static_cast<double>(i);
    f.cols = {stamps, target, feat};
    return f;
}

} // namespace

TEST_CASE("scaler: definitional z-score and exact round-trip") {
    // training range holds mean 5, sd 2
    std::vector<double> y{3, 7, 3, 7, 3, 7, 3, 7, 3, 7, 100, -50};
    std::vector<double> x{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
    SeriesFrame f = numeric_frame(y, x);
    SplitPlan p = plan_splits(12, 0.1);
    REQUIRE(p.n_train == 10);
    const Scaler s = Scaler::fit(f, p);
    REQUIRE_THAT(s.target_mean(), Catch::Matchers::WithinAbs(5.0, 1e-12));
    REQUIRE_THAT(s.target_std(), Catch::Matchers::WithinAbs(2.0, 1e-12));
    REQUIRE_THAT(s.scale_target(7.0), Catch::Matchers::WithinAbs(1.0, 1e-12));

    const SeriesFrame scaled = s.apply(f);
    for (std::size_t i = 0; i < f.n_rows(); ++i) {
        REQUIRE_THAT(s.invert_target(scaled.col("y")[i]),
                     Catch::Matchers::WithinAbs(f.col("y")[i], 1e-12));
    }
}

TEST_CASE("scaler statistics never depend on validation or test rows") {
    std::vector<double> y(40), x(40);
    SeededRng rng(4);
    for (std::size_t i = 0; i < 40; ++i) {
        y[i] = rng.uniform(0.0, 10.0);
        x[i] = rng.uniform(-5.0, 5.0);
    }
    SeriesFrame f = numeric_frame(y, x);
    const SplitPlan p = plan_splits(40, 0.3);
    const Scaler before = Scaler::fit(f, p);

    // mutate every non-training row
    for (std::size_t i = p.val_begin(); i < p.test_end(); ++i) {
        f.cols[1][i] += 1000.0;
        f.cols[2][i] -= 777.0;
    }
    const Scaler after = Scaler::fit(f, p);
    REQUIRE(before.target_mean() == after.target_mean());
    REQUIRE(before.target_std() == after.target_std());
}

TEST_CASE("scaler flags constant features and rejects constant targets") {
    std::vector<double> y(20, 3.14), x(20);
    for (std::size_t i = 0; i < 20; ++i) x[i] = static_cast<double>(i);
    SeriesFrame f = numeric_frame(y, x);
    const SplitPlan p = plan_splits(20, 0.2);
    REQUIRE_THROWS_AS(Scaler::fit(f, p), ValueError);

    std::vector<double> y2(20);
    for (std::size_t i = 0; i < 20; ++i) y2[i] = static_cast<double>(i % 7);
    SeriesFrame f2 = numeric_frame(y2, std::vector<double>(20, 1.0));
    const Scaler s = Scaler::fit(f2, p);
    REQUIRE(s.constant_columns() == std::vector<std::string>{"x"});
    const SeriesFrame scaled = s.apply(f2);
    REQUIRE(scaled.col("x")[0] == 1.0); // passed through unscaled
}

TEST_CASE("one-hot encoding: vocabulary order, widths and errors") {
    SeriesFrame f;
    f.schema = tiny_schema();
    f.cols = {{1, 2}, {0.5, 0.6}, {10, 11}, {1, 3}}; // spring, autumn
    const SeriesFrame e = encode_categoricals(f);
    REQUIRE(e.schema.columns.size() == 3 + 4);
    REQUIRE(e.col("season=spring") == std::vector<double>{1.0, 0.0});
    REQUIRE(e.col("season=autumn") == std::vector<double>{0.0, 1.0});
    REQUIRE(e.col("season=winter") == std::vector<double>{0.0, 0.0});

    SeriesFrame bad = f;
    bad.cols[3][0] = 9.0; // outside the four-word vocabulary
    REQUIRE_THROWS_AS(encode_categoricals(bad), ValueError);
}

TEST_CASE("twelve locations expand to twelve one-hot columns") {
    const SeriesFrame f = synthesize({.seed = 1, .n = 120, .locations = 12, .noise = 1.0});
    const SeriesFrame e = encode_categoricals(f);
    std::size_t loc_cols = 0;
    for (const auto& c : e.schema.columns) {
        if (c.name.rfind("location=", 0) == 0) ++loc_cols;
    }
    REQUIRE(loc_cols == 12);
}

TEST_CASE("window counts and boundaries") {
    std::vector<double> y(30), x(30);
    for (std::size_t i = 0; i < 30; ++i) {
        y[i] = static_cast<double>(i);
        x[i] = static_cast<double>(100 + i);
    }
    SeriesFrame f = numeric_frame(y, x);
    SplitPlan p;
    p.test_ratio = 0.3;
    p.n_total = 30;
    p.n_train = 10;
    p.n_val = 10;
    p.n_test = 10;

    const PartitionWindows w = make_windows(f, p, 4, 1);
    REQUIRE(w.train.count() == 6); // 10 - 4 - 1 + 1
    REQUIRE(w.val.count() == 6);
    REQUIRE(w.test.count() == 6);
    REQUIRE(w.feature_count == 1);

    // no window may touch rows outside its partition
    for (std::size_t i = 0; i < w.train.count(); ++i) {
        REQUIRE(w.train.sources[i] + 4 + 1 - 1 <= 9);
    }
    for (std::size_t i = 0; i < w.val.count(); ++i) {
        REQUIRE(w.val.sources[i] >= 10);
        REQUIRE(w.val.sources[i] + 4 <= 19);
    }
    // labels line up with the row after the window
    REQUIRE(w.train.targets[0] == y[4]);
    REQUIRE(w.val.targets[0] == y[14]);
    // inputs carry the feature column
    REQUIRE(w.train.inputs.at(0, 0, 0) == 100.0);

    // minimal case: single-row windows predicting the next row
    const PartitionWindows w1 = make_windows(f, p, 1, 1);
    REQUIRE(w1.train.count() == 9);
    REQUIRE(w1.train.inputs.at(0, 0, 0) == 100.0);
    REQUIRE(w1.train.targets[0] == y[1]);

    // partition too short
    REQUIRE_THROWS_AS(make_windows(f, p, 10, 1), ValueError);
}

TEST_CASE("synthesizer determinism, clipping and moment sanity") {
    const SynthConfig cfg{.seed = 77, .n = 4000, .locations = 12, .noise = 1.0};
    const SeriesFrame a = synthesize(cfg);
    const SeriesFrame b = synthesize(cfg);
    REQUIRE(a.n_rows() == 4000);
    for (std::size_t c = 0; c < a.cols.size(); ++c) {
        for (std::size_t i = 0; i < a.n_rows(); ++i) REQUIRE(a.cols[c][i] == b.cols[c][i]);
    }
    double mean = 0.0;
    for (double v : a.col("power_output")) {
        REQUIRE(v >= 0.0);
        mean += v;
    }
    mean /= static_cast<double>(a.n_rows());
    // loosely informed by the published dataset's 12.9785 W mean
    REQUIRE(mean > 12.9785 * 0.7);
    REQUIRE(mean < 12.9785 * 1.3);

    REQUIRE_THROWS_AS(synthesize({.seed = 1, .n = 10, .locations = 3, .noise = 1.0}), ValueError);
}

TEST_CASE("schema files round-trip") {
    const fs::path p = fs::temp_directory_path() / "deepts_schema.json";
    const Schema s = synth_schema(5);
    save_schema(s, p.string());
    const Schema loaded = load_schema(p.string());
    REQUIRE(loaded.columns.size() == s.columns.size());
    for (std::size_t i = 0; i < s.columns.size(); ++i) {
        REQUIRE(loaded.columns[i].name == s.columns[i].name);
        REQUIRE(loaded.columns[i].role == s.columns[i].role);
        REQUIRE(loaded.columns[i].categories == s.columns[i].categories);
    }
    fs::remove(p);
    REQUIRE_THROWS_AS(load_schema("/nonexistent/schema.json"), IoError);
}

TEST_CASE("schema validation rejects degenerate layouts") {
    Schema no_target;
    no_target.columns = {{"t", ColumnRole::Timestamp, "", {}}};
    REQUIRE_THROWS_AS(no_target.validate(), ValueError);

    Schema two_targets = tiny_schema();
    two_targets.columns.push_back({"p2", ColumnRole::Target, "", {}});
    REQUIRE_THROWS_AS(two_targets.validate(), ValueError);

    Schema empty_vocab = tiny_schema();
    empty_vocab.columns[3].categories.clear();
    REQUIRE_THROWS_AS(empty_vocab.validate(), ValueError);
}

TEST_CASE("row shuffling is deterministic per seed") {
    const SeriesFrame f = synthesize({.seed = 9, .n = 300, .locations = 3, .noise = 1.0});
    SeededRng r1(42, 1), r2(42, 1);
    const SeriesFrame a = shuffle_rows(f, r1);
    const SeriesFrame b = shuffle_rows(f, r2);
    bool moved = false;
    for (std::size_t i = 0; i < a.n_rows(); ++i) {
        REQUIRE(a.cols[0][i] == b.cols[0][i]);
        moved |= a.cols[0][i] != f.cols[0][i];
    }
    REQUIRE(moved);
}

TEST_CASE("csv save/load round-trips a synthetic frame") {
    const SeriesFrame f = synthesize({.seed = 5, .n = 150, .locations = 4, .noise = 1.0});
    const fs::path p = fs::temp_directory_path() / "deepts_synth.csv";
    save_csv(f, p.string());
    const SeriesFrame loaded = load_csv(p.string(), f.schema);
    REQUIRE(loaded.n_rows() == f.n_rows());
    REQUIRE(loaded.dropped_rows == 0);
    for (std::size_t i = 0; i < f.n_rows(); ++i) {
        REQUIRE(loaded.col("location")[i] == f.col("location")[i]);
        REQUIRE_THAT(loaded.col("power_output")[i],
                     Catch::Matchers::WithinRel(f.col("power_output")[i], 1e-15));
    }
    fs::remove(p);
}
