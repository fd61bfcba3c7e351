#pragma once

#include "rainrisk/evaluate.hpp"
#include "rainrisk/series.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace rainrisk {

/**
 * Everything one toolkit run needs, echoed verbatim into run_meta.json so a
 * bundle can be reproduced from its own metadata.
 */
struct RunConfig {
    std::string rainfall_path;
    std::string production_path;
    int holdout = 3;
    double floor_mm = 0.1;
    bool rv4_sqrt = false;
    bool order_override = false;
    int p = 0;
    int d = 1;
    int q = 0;
    int max_order = 2;
    bool include_constant = true;
    int garch_r = 1;
    int garch_s = 1;
    std::vector<std::string> families;  // fit subcommand; the grid always runs all four
    std::uint64_t seed = 0;
    int threads = 0;
    int opt_max_evals = 20000;
    double opt_tol = 1e-9;
    bool strict = false;

    GridConfig to_grid_config() const;
};

struct ReportBundle {
    std::filesystem::path directory;
    std::filesystem::path grid_csv;
    std::filesystem::path tables_md;
    std::filesystem::path run_meta;
    std::filesystem::path diagnostics_dir;
    std::string config_hash;
};

/**
 * Reads a `year,month,rainfall_mm` CSV. Every year in the file must carry
 * all twelve months, years must be consecutive, and values non-negative.
 * Rows may appear in any order.
 */
MonthlyRainfallSeries ingest_rainfall(const std::string& path);

/**
 * Reads a `year,production[,unit]` CSV where the optional third header
 * field names the measurement unit. Years must be consecutive once sorted;
 * out-of-order rows are accepted with a warning.
 */
AnnualSeries ingest_production(const std::string& path,
                               std::vector<std::string>* warnings = nullptr);

/**
 * Writes the full bundle (grid.csv, tables.md, run_meta.json and the
 * per-fit diagnostics JSON files) for a finished grid. The bundle is
 * assembled in a scratch directory and renamed into place, so an
 * interrupted run leaves nothing behind at out_dir. Fails if out_dir
 * already exists.
 */
ReportBundle emit_reports(const EvaluationGrid& grid, const RunConfig& config,
                          const std::filesystem::path& out_dir);

/// Reconstructs the configuration recorded in a bundle's run_meta.json.
RunConfig run_config_from_meta(const std::filesystem::path& meta_path);

/// FNV-1a hash of a file's bytes, as a fixed-width hex string.
std::string file_hash(const std::string& path);

/// FNV-1a hash of a string, as a fixed-width hex string.
std::string string_hash(const std::string& text);

}  // namespace rainrisk
