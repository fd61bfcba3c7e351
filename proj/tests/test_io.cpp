#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rainrisk/errors.hpp"
#include "rainrisk/evaluate.hpp"
#include "rainrisk/io.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace rainrisk;

namespace {

// per-process scratch directory with unique file names
fs::path scratch_dir() {
    static const fs::path dir = [] {
        std::random_device rd;
        const fs::path p =
            fs::temp_directory_path() / ("rainrisk_test_" + std::to_string(rd()));
        fs::create_directories(p);
        return p;
    }();
    return dir;
}

fs::path write_file(const std::string& name, const std::string& content) {
    const fs::path path = scratch_dir() / name;
    std::ofstream out(path);
    out << content;
    return path;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string two_year_rainfall() {
    std::string csv = "year,month,rainfall_mm\n";
    for (int year : {1975, 1976}) {
        for (int month = 1; month <= 12; ++month) {
            csv += std::to_string(year) + "," + std::to_string(month) + "," +
                   std::to_string(10 * month) + ".5\n";
        }
    }
    return csv;
}

RunConfig fixture_config() {
    RunConfig config;
    config.rainfall_path = std::string(RAINRISK_DATA_DIR) + "/sample_rainfall.csv";
    config.production_path = std::string(RAINRISK_DATA_DIR) + "/sample_production.csv";
    return config;
}

int count_occurrences(const std::string& text, const std::string& needle) {
    int count = 0;
    std::size_t pos = 0;
    while ((pos = text.find(needle, pos)) != std::string::npos) {
        ++count;
        pos += needle.size();
    }
    return count;
}

}  // namespace

TEST_CASE("ingest_rainfall: well-formed two-year file") {
    const fs::path path = write_file("rain_ok.csv", two_year_rainfall());
    const MonthlyRainfallSeries panel = ingest_rainfall(path.string());
    CHECK(panel.start_year == 1975);
    CHECK(panel.size() == 2);
    CHECK(panel.rows[0][0] == doctest::Approx(10.5));
    CHECK(panel.rows[1][11] == doctest::Approx(120.5));
}

TEST_CASE("ingest_rainfall: missing month is named in the error") {
    std::string csv = "year,month,rainfall_mm\n";
    for (int year : {1975, 1976}) {
        for (int month = 1; month <= 12; ++month) {
            if (year == 1975 && month == 6) {
                continue;
            }
            csv += std::to_string(year) + "," + std::to_string(month) + ",10\n";
        }
    }
    const fs::path path = write_file("rain_missing.csv", csv);
    try {
        ingest_rainfall(path.string());
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        const std::string what = e.what();
        CHECK(what.find("1975") != std::string::npos);
        CHECK(what.find("month 6") != std::string::npos);
        CHECK(what.find("missing") != std::string::npos);
    }
}

TEST_CASE("ingest_rainfall: negative values, duplicates and bad headers") {
    std::string negative = two_year_rainfall();
    negative += "1977,1,-3\n";
    CHECK_THROWS_AS(ingest_rainfall(write_file("rain_neg.csv", negative).string()),
                    ValidationError);

    std::string duplicate = two_year_rainfall();
    duplicate += "1975,6,99\n";
    CHECK_THROWS_AS(ingest_rainfall(write_file("rain_dup.csv", duplicate).string()),
                    ValidationError);

    CHECK_THROWS_AS(
        ingest_rainfall(write_file("rain_hdr.csv", "year,rainfall\n1975,1\n").string()),
        ValidationError);

    CHECK_THROWS_AS(ingest_rainfall((scratch_dir() / "does_not_exist.csv").string()), IoError);
}

TEST_CASE("ingest_production: well-formed file with a unit header") {
    std::string csv = "year,production,tonnes\n";
    for (int year = 1963; year < 1963 + 58; ++year) {
        csv += std::to_string(year) + "," + std::to_string(1000 + year) + "\n";
    }
    const AnnualSeries series = ingest_production(write_file("prod_ok.csv", csv).string());
    CHECK(series.size() == 58);
    CHECK(series.start_year == 1963);
    CHECK(series.unit_label == "tonnes");

    const AnnualSeries single =
        ingest_production(write_file("prod_one.csv", "year,production\n2001,5\n").string());
    CHECK(single.size() == 1);
}

TEST_CASE("ingest_production: shuffled rows sort with a warning") {
    const std::string csv = "year,production\n2003,3\n2001,1\n2002,2\n";
    std::vector<std::string> warnings;
    const AnnualSeries series =
        ingest_production(write_file("prod_shuffled.csv", csv).string(), &warnings);
    CHECK(series.start_year == 2001);
    CHECK(series.values == std::vector<double>{1, 2, 3});
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("sorted") != std::string::npos);
}

TEST_CASE("ingest_production: gaps, duplicates and parse errors") {
    CHECK_THROWS_AS(ingest_production(
                        write_file("prod_gap.csv", "year,production\n2001,1\n2003,2\n").string()),
                    ValidationError);
    CHECK_THROWS_AS(ingest_production(
                        write_file("prod_dup.csv", "year,production\n2001,1\n2001,2\n").string()),
                    ValidationError);
    try {
        ingest_production(
            write_file("prod_bad.csv", "year,production\n2001,1\n2002,abc\n").string());
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
        CHECK(std::string(e.what()).find("abc") != std::string::npos);
    }
}

TEST_CASE("bundled fixtures load and hash") {
    const RunConfig config = fixture_config();
    const MonthlyRainfallSeries rainfall = ingest_rainfall(config.rainfall_path);
    CHECK(rainfall.start_year == 1962);
    CHECK(rainfall.size() == 59);
    const AnnualSeries production = ingest_production(config.production_path);
    CHECK(production.start_year == 1962);
    CHECK(production.size() == 59);
    CHECK(production.unit_label == "thousand_tonnes");
    CHECK(file_hash(config.rainfall_path).size() == 16);
    CHECK(file_hash(config.rainfall_path) == file_hash(config.rainfall_path));
    CHECK(file_hash(config.rainfall_path) != file_hash(config.production_path));
}

TEST_CASE("emit_reports: bundle layout, block count and re-emission determinism") {
    const RunConfig config = fixture_config();
    const MonthlyRainfallSeries rainfall = ingest_rainfall(config.rainfall_path);
    const AnnualSeries production = ingest_production(config.production_path);
    const EvaluationGrid grid = run_grid(production, rainfall, config.to_grid_config());

    const fs::path out_a = scratch_dir() / "bundle_a";
    const ReportBundle bundle = emit_reports(grid, config, out_a);
    CHECK(fs::exists(bundle.grid_csv));
    CHECK(fs::exists(bundle.tables_md));
    CHECK(fs::exists(bundle.run_meta));
    CHECK(fs::is_directory(bundle.diagnostics_dir));
    CHECK(bundle.config_hash.size() == 16);

    int entries = 0;
    for (const auto& entry : fs::directory_iterator(out_a)) {
        (void)entry;
        ++entries;
    }
    CHECK(entries == 4);

    int diag_files = 0;
    for (const auto& entry : fs::directory_iterator(bundle.diagnostics_dir)) {
        (void)entry;
        ++diag_files;
    }
    CHECK(diag_files == 45);

    const std::string tables = read_file(bundle.tables_md);
    CHECK(count_occurrences(tables, "## Table ") == 9);
    CHECK(tables.find(bundle.config_hash) != std::string::npos);

    const std::string csv = read_file(bundle.grid_csv);
    CHECK(count_occurrences(csv, "\n") == 2 + 128);  // hash line + header + rows
    CHECK(csv.find("# config_hash=" + bundle.config_hash) == 0);

    // emitting the same grid again is byte-identical
    const fs::path out_b = scratch_dir() / "bundle_b";
    const ReportBundle again = emit_reports(grid, config, out_b);
    CHECK(read_file(again.grid_csv) == csv);
    CHECK(read_file(again.tables_md) == tables);
    CHECK(read_file(again.run_meta) == read_file(bundle.run_meta));
    for (const auto& entry : fs::directory_iterator(bundle.diagnostics_dir)) {
        const fs::path other = again.diagnostics_dir / entry.path().filename();
        CHECK(read_file(entry.path()) == read_file(other));
    }

    // refusing to overwrite an existing bundle
    CHECK_THROWS_AS(emit_reports(grid, config, out_a), IoError);
}

TEST_CASE("emit_reports: empty grid and unwritable destinations") {
    const RunConfig config = fixture_config();
    EvaluationGrid empty;
    CHECK_THROWS_AS(emit_reports(empty, config, scratch_dir() / "never"), ValidationError);
    CHECK_FALSE(fs::exists(scratch_dir() / "never"));

    // a parent that is a file, not a directory
    const fs::path blocker = write_file("blocker.txt", "x");
    const MonthlyRainfallSeries rainfall = ingest_rainfall(config.rainfall_path);
    const AnnualSeries production = ingest_production(config.production_path);
    const EvaluationGrid grid = run_grid(production, rainfall, config.to_grid_config());
    CHECK_THROWS_AS(emit_reports(grid, config, blocker / "bundle"), IoError);
    CHECK_FALSE(fs::exists(blocker / "bundle"));
}

TEST_CASE("run_config_from_meta: self-describing bundles") {
    const RunConfig config = fixture_config();
    const MonthlyRainfallSeries rainfall = ingest_rainfall(config.rainfall_path);
    const AnnualSeries production = ingest_production(config.production_path);
    const EvaluationGrid grid = run_grid(production, rainfall, config.to_grid_config());
    const fs::path out = scratch_dir() / "bundle_meta";
    const ReportBundle bundle = emit_reports(grid, config, out);

    const RunConfig loaded = run_config_from_meta(bundle.run_meta);
    CHECK(loaded.rainfall_path == config.rainfall_path);
    CHECK(loaded.production_path == config.production_path);
    CHECK(loaded.holdout == config.holdout);
    CHECK(loaded.floor_mm == config.floor_mm);
    CHECK(loaded.seed == config.seed);

    // re-running from the recorded config reproduces the bundle byte for byte
    const EvaluationGrid rerun = run_grid(ingest_production(loaded.production_path),
                                          ingest_rainfall(loaded.rainfall_path),
                                          loaded.to_grid_config());
    const fs::path out2 = scratch_dir() / "bundle_meta_rerun";
    const ReportBundle bundle2 = emit_reports(rerun, loaded, out2);
    CHECK(read_file(bundle2.grid_csv) == read_file(bundle.grid_csv));
    CHECK(read_file(bundle2.tables_md) == read_file(bundle.tables_md));
    CHECK(read_file(bundle2.run_meta) == read_file(bundle.run_meta));

    CHECK_THROWS_AS(run_config_from_meta(scratch_dir() / "missing.json"), IoError);
    const fs::path bad = write_file("bad_meta.json", "{\"not_config\": 1}");
    CHECK_THROWS_AS(run_config_from_meta(bad), ValidationError);
}
