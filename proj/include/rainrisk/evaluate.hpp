#pragma once

#include "rainrisk/garch.hpp"
#include "rainrisk/mean_model.hpp"
#include "rainrisk/risk.hpp"
#include "rainrisk/series.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace rainrisk {

struct SplitConfig {
    int holdout = 3;
};

/// Chronological split: the last `holdout` observations become the test set.
std::pair<AnnualSeries, AnnualSeries> split(const AnnualSeries& series, const SplitConfig& cfg);

enum class HorizonMode { per_horizon, cumulative };

/// Per-horizon: |a_h - f_h| for each h. Cumulative: the mean absolute error
/// over horizons 1..h, reported for each h.
std::vector<double> mae(const std::vector<double>& actual, const std::vector<double>& forecast,
                        HorizonMode mode);

/// Same shapes as mae, with the squared-error mean under a root.
std::vector<double> rmse(const std::vector<double>& actual, const std::vector<double>& forecast,
                         HorizonMode mode);

struct AicPair {
    double raw = 0.0;
    double per_obs = 0.0;
};

/// raw = 2k - 2 loglik; per_obs = raw / n. Both AIC conventions appear in
/// published GARCH results, so every output carries the pair.
AicPair aic_pair(double loglik, int k, int n);

enum class ModelKind { arima, garch_arima, arimax, garch_arimax };
enum class RegressorAlignment { lag1, same_time };

const char* to_string(ModelKind m);
const char* to_string(RegressorAlignment a);

/// Metrics attached to one fitted model on one train/test split.
struct CellMetrics {
    double aic_raw = 0.0;
    double aic_per_obs = 0.0;
    std::vector<double> mae_per_horizon;
    std::vector<double> mae_cumulative;
    std::vector<double> rmse_per_horizon;
    std::vector<double> rmse_cumulative;
    bool converged = false;
    std::string error;  // non-empty when the fit failed outright
};

/**
 * One unique model estimation inside the grid. Baseline fits (no
 * regressor) are shared across the table positions that display them.
 */
struct FitRecord {
    std::string key;
    ModelKind model = ModelKind::arima;
    GarchFamily family = GarchFamily::sgarch;        // GARCH kinds only
    RiskVariant rv = RiskVariant::rv1;               // ARIMAX kinds only
    RegressorAlignment alignment = RegressorAlignment::lag1;
    MeanSpec order;
    MeanParams mean_params;
    VarianceParams var_params;                       // GARCH kinds only
    double init_sigma2 = 0.0;
    double sigma2_const = 0.0;                       // constant-variance kinds
    std::vector<double> sigma2_path;
    std::vector<double> forecast_levels;
    double loglik = 0.0;
    bool near_boundary = false;
    CellMetrics metrics;
};

/// One position of the published table layout; `fit_index` points into
/// EvaluationGrid::fits.
struct GridCell {
    GarchFamily family_block = GarchFamily::sgarch;
    RegressorAlignment alignment = RegressorAlignment::lag1;
    RiskVariant rv_block = RiskVariant::rv1;
    ModelKind model = ModelKind::arima;
    int fit_index = -1;
};

struct GridConfig {
    SplitConfig split;
    int diff_order = 1;
    bool order_override = false;
    int forced_p = 0;
    int forced_q = 0;
    bool include_constant = true;
    int max_order = 2;     // AIC search bound for p and q
    int garch_r = 1;
    int garch_s = 1;
    RiskOptions risk;
    FitOptions opt;
    int threads = 0;       // 0 = library default, 1 = serial reference path
};

struct EvaluationGrid {
    std::vector<GridCell> cells;   // families x alignments x RVs x models
    std::vector<FitRecord> fits;   // unique estimations backing the cells
    MeanSpec order_used;
    int train_length = 0;
    int holdout = 0;
    int first_train_year = 0;
    int last_train_year = 0;
    std::vector<int> test_years;
    std::vector<double> test_levels;
    double floor_mm = 0.0;
    bool rv4_sqrt = false;
    std::uint64_t seed = 0;
    int threads_used = 1;
    std::uint64_t production_hash = 0;  // content hashes of the in-memory data
    std::uint64_t rainfall_hash = 0;

    const FitRecord& fit_for(const GridCell& cell) const {
        return fits[static_cast<std::size_t>(cell.fit_index)];
    }
    const GridCell* find_cell(GarchFamily family, RegressorAlignment alignment, RiskVariant rv,
                              ModelKind model) const;
};

/**
 * Runs the full model-comparison grid: for every GARCH family, regressor
 * alignment and risk variant, the four model kinds are estimated on the
 * training window and scored on the holdout years. Baseline fits are
 * computed once and replicated across the table positions that show them.
 * Individual fit failures are recorded in the affected cells and never
 * abort the run.
 */
EvaluationGrid run_grid(const AnnualSeries& production, const MonthlyRainfallSeries& rainfall,
                        const GridConfig& config);

/// FNV-1a content hash used for the grid's data fingerprints.
std::uint64_t content_hash(const std::vector<double>& values, std::uint64_t seed_hash = 1469598103934665603ULL);

}  // namespace rainrisk
