#include "rainrisk/evaluate.hpp"

#include "rainrisk/errors.hpp"
#include "rainrisk/stat_tests.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>
#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rainrisk {

namespace {

constexpr std::array<GarchFamily, 4> kFamilies = {GarchFamily::sgarch, GarchFamily::egarch,
                                                  GarchFamily::gjrgarch, GarchFamily::igarch};
constexpr std::array<RegressorAlignment, 2> kAlignments = {RegressorAlignment::lag1,
                                                           RegressorAlignment::same_time};
constexpr std::array<RiskVariant, 4> kVariants = {RiskVariant::rv1, RiskVariant::rv2,
                                                  RiskVariant::rv3, RiskVariant::rv4};
constexpr std::array<ModelKind, 4> kModels = {ModelKind::arima, ModelKind::garch_arima,
                                              ModelKind::arimax, ModelKind::garch_arimax};

std::uint64_t mix_hash(std::uint64_t h, std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
}

std::uint64_t key_hash(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string fit_key(ModelKind model, GarchFamily family, RiskVariant rv,
                    RegressorAlignment alignment) {
    switch (model) {
        case ModelKind::arima:
            return "arima";
        case ModelKind::garch_arima:
            return std::string("garch_arima_") + to_string(family);
        case ModelKind::arimax:
            return std::string("arimax_") + to_string(rv) + "_" + to_string(alignment);
        case ModelKind::garch_arimax:
            return std::string("garch_arimax_") + to_string(family) + "_" + to_string(rv) + "_" +
                   to_string(alignment);
    }
    return "?";
}

}  // namespace

const char* to_string(ModelKind m) {
    switch (m) {
        case ModelKind::arima: return "ARIMA";
        case ModelKind::garch_arima: return "GARCH-ARIMA";
        case ModelKind::arimax: return "ARIMAX";
        case ModelKind::garch_arimax: return "GARCH-ARIMAX";
    }
    return "?";
}

const char* to_string(RegressorAlignment a) {
    return a == RegressorAlignment::lag1 ? "lag1" : "same_time";
}

std::pair<AnnualSeries, AnnualSeries> split(const AnnualSeries& series, const SplitConfig& cfg) {
    if (cfg.holdout < 1) {
        throw ValidationError("holdout must be at least 1");
    }
    if (cfg.holdout >= series.size()) {
        throw ValidationError("holdout " + std::to_string(cfg.holdout) +
                              " leaves no training data for a series of length " +
                              std::to_string(series.size()));
    }
    const int n_train = series.size() - cfg.holdout;
    AnnualSeries train(series.start_year,
                       std::vector<double>(series.values.begin(), series.values.begin() + n_train),
                       series.unit_label);
    AnnualSeries test(series.start_year + n_train,
                      std::vector<double>(series.values.begin() + n_train, series.values.end()),
                      series.unit_label);
    return {std::move(train), std::move(test)};
}

std::vector<double> mae(const std::vector<double>& actual, const std::vector<double>& forecast,
                        HorizonMode mode) {
    if (actual.size() != forecast.size()) {
        throw ValidationError("mae: actual and forecast lengths differ");
    }
    std::vector<double> out(actual.size());
    double running = 0.0;
    for (std::size_t h = 0; h < actual.size(); ++h) {
        const double err = std::abs(actual[h] - forecast[h]);
        if (mode == HorizonMode::per_horizon) {
            out[h] = err;
        } else {
            running += err;
            out[h] = running / static_cast<double>(h + 1);
        }
    }
    return out;
}

std::vector<double> rmse(const std::vector<double>& actual, const std::vector<double>& forecast,
                         HorizonMode mode) {
    if (actual.size() != forecast.size()) {
        throw ValidationError("rmse: actual and forecast lengths differ");
    }
    std::vector<double> out(actual.size());
    double running = 0.0;
    for (std::size_t h = 0; h < actual.size(); ++h) {
        const double err2 = (actual[h] - forecast[h]) * (actual[h] - forecast[h]);
        if (mode == HorizonMode::per_horizon) {
            out[h] = std::sqrt(err2);
        } else {
            running += err2;
            out[h] = std::sqrt(running / static_cast<double>(h + 1));
        }
    }
    return out;
}

AicPair aic_pair(double loglik, int k, int n) {
    if (n <= 0 || k < 1) {
        throw ValidationError("aic_pair needs n > 0 and k >= 1");
    }
    AicPair out;
    out.raw = 2.0 * static_cast<double>(k) - 2.0 * loglik;
    out.per_obs = out.raw / static_cast<double>(n);
    return out;
}

std::uint64_t content_hash(const std::vector<double>& values, std::uint64_t seed_hash) {
    std::uint64_t h = seed_hash;
    for (double v : values) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof(bits));
        for (int b = 0; b < 8; ++b) {
            h ^= (bits >> (8 * b)) & 0xffULL;
            h *= 1099511628211ULL;
        }
    }
    return h;
}

const GridCell* EvaluationGrid::find_cell(GarchFamily family, RegressorAlignment alignment,
                                          RiskVariant rv, ModelKind model) const {
    for (const GridCell& cell : cells) {
        if (cell.family_block == family && cell.alignment == alignment && cell.rv_block == rv &&
            cell.model == model) {
            return &cell;
        }
    }
    return nullptr;
}

EvaluationGrid run_grid(const AnnualSeries& production, const MonthlyRainfallSeries& rainfall,
                        const GridConfig& config) {
    // --- data preparation -------------------------------------------------
    auto [train_levels, test_levels] = split(production, config.split);
    if (config.diff_order >= train_levels.size()) {
        throw ValidationError("training window too short for differencing order " +
                              std::to_string(config.diff_order));
    }
    const DifferencedSeries train = difference(train_levels, config.diff_order);
    const int h = config.split.holdout;

    // Regressor availability: same-time needs rainfall through the last test
    // year, lag-1 through the year before it.
    EvaluationGrid grid;
    std::array<AnnualSeries, 4> regressors;
    for (std::size_t v = 0; v < kVariants.size(); ++v) {
        regressors[v] = build_regressor(rainfall, kVariants[v], config.risk);
    }
    const int first_needed = train.start_year() - 1;
    const int last_needed = test_levels.last_year();
    if (regressors[0].start_year > first_needed || regressors[0].last_year() < last_needed) {
        throw ValidationError("rainfall panel years " + std::to_string(rainfall.start_year) + "-" +
                              std::to_string(rainfall.last_year()) + " do not cover years " +
                              std::to_string(first_needed) + "-" + std::to_string(last_needed) +
                              " needed for both alignments");
    }

    // --- mean order, chosen once on the training window --------------------
    MeanSpec order;
    if (config.order_override) {
        order.p = config.forced_p;
        order.d = config.diff_order;
        order.q = config.forced_q;
        order.include_constant = config.include_constant;
    } else {
        order = select_order(train, {}, config.include_constant, 0, config.max_order, config.opt);
    }
    order.exog_count = 0;

    grid.order_used = order;
    grid.train_length = train.size();
    grid.holdout = h;
    grid.first_train_year = train.start_year();
    grid.last_train_year = train.start_year() + train.size() - 1;
    grid.test_levels = test_levels.values;
    for (int i = 0; i < h; ++i) {
        grid.test_years.push_back(test_levels.start_year + i);
    }
    grid.floor_mm = config.risk.floor_mm;
    grid.rv4_sqrt = config.risk.rv4_sqrt;
    grid.seed = config.opt.seed;
    grid.production_hash = content_hash(production.values, 14695981039346656037ULL ^
                                                               static_cast<std::uint64_t>(
                                                                   production.start_year));
    std::vector<double> flat_rain;
    flat_rain.reserve(static_cast<std::size_t>(rainfall.size()) * 12);
    for (const auto& row : rainfall.rows) {
        flat_rain.insert(flat_rain.end(), row.begin(), row.end());
    }
    grid.rainfall_hash = content_hash(
        flat_rain, 14695981039346656037ULL ^ static_cast<std::uint64_t>(rainfall.start_year));

    // --- unique fit work list ----------------------------------------------
    std::vector<FitRecord> fits;
    fits.emplace_back();
    fits.back().key = fit_key(ModelKind::arima, kFamilies[0], kVariants[0], kAlignments[0]);
    fits.back().model = ModelKind::arima;
    for (GarchFamily family : kFamilies) {
        fits.emplace_back();
        fits.back().key = fit_key(ModelKind::garch_arima, family, kVariants[0], kAlignments[0]);
        fits.back().model = ModelKind::garch_arima;
        fits.back().family = family;
    }
    for (RegressorAlignment alignment : kAlignments) {
        for (RiskVariant rv : kVariants) {
            fits.emplace_back();
            fits.back().key = fit_key(ModelKind::arimax, kFamilies[0], rv, alignment);
            fits.back().model = ModelKind::arimax;
            fits.back().rv = rv;
            fits.back().alignment = alignment;
        }
    }
    for (GarchFamily family : kFamilies) {
        for (RegressorAlignment alignment : kAlignments) {
            for (RiskVariant rv : kVariants) {
                fits.emplace_back();
                fits.back().key = fit_key(ModelKind::garch_arimax, family, rv, alignment);
                fits.back().model = ModelKind::garch_arimax;
                fits.back().family = family;
                fits.back().rv = rv;
                fits.back().alignment = alignment;
            }
        }
    }

    // --- per-fit execution --------------------------------------------------
    auto regressor_index = [&](RiskVariant rv) {
        return static_cast<std::size_t>(static_cast<int>(rv));
    };
    auto run_one = [&](FitRecord& rec) {
        try {
            const bool has_exog =
                rec.model == ModelKind::arimax || rec.model == ModelKind::garch_arimax;
            const bool has_garch =
                rec.model == ModelKind::garch_arima || rec.model == ModelKind::garch_arimax;

            MeanSpec spec = order;
            ExogRows exog;
            ExogRows future_exog;
            if (has_exog) {
                spec.exog_count = 1;
                const AnnualSeries& reg = regressors[regressor_index(rec.rv)];
                const int lag = rec.alignment == RegressorAlignment::lag1 ? 1 : 0;
                const AlignedPair pair = align(train.as_annual(), reg, lag);
                if (pair.production.size() != train.size()) {
                    throw ValidationError("regressor does not cover the full training window");
                }
                exog.reserve(static_cast<std::size_t>(pair.regressor.size()));
                for (double v : pair.regressor.values) {
                    exog.push_back({v});
                }
                for (int step = 1; step <= h; ++step) {
                    const int target_year = grid.last_train_year + step;
                    future_exog.push_back({reg.value_at_year(target_year - lag)});
                }
            }

            FitOptions opt = config.opt;
            opt.seed = mix_hash(config.opt.seed, key_hash(rec.key));

            std::vector<double> levels;
            if (has_garch) {
                VarianceSpec vspec;
                vspec.family = rec.family;
                vspec.r = config.garch_r;
                vspec.s = config.garch_s;
                const GarchFit fit = fit_garch(spec, vspec, train, exog, opt);
                const GarchForecast fc = forecast_garch(fit, h, future_exog);
                levels = fc.mean_levels;
                rec.order = spec;
                rec.mean_params = fit.mean_params;
                rec.var_params = fit.var_params;
                rec.init_sigma2 = fit.init_sigma2;
                rec.sigma2_path = fit.sigma2_path;
                rec.loglik = fit.loglik;
                rec.near_boundary = fit.near_boundary;
                rec.metrics.converged = fit.converged;
                rec.metrics.aic_raw = fit.aic_raw;
                rec.metrics.aic_per_obs = fit.aic_per_obs;
            } else {
                const MeanFit fit = fit_mean(spec, train, exog, opt);
                const MeanForecast fc = forecast_mean(fit, h, future_exog);
                levels = fc.levels;
                rec.order = spec;
                rec.mean_params = fit.params;
                rec.sigma2_const = fit.sigma2;
                rec.sigma2_path.assign(static_cast<std::size_t>(train.size()), fit.sigma2);
                rec.loglik = fit.loglik;
                rec.metrics.converged = fit.converged;
                rec.metrics.aic_raw = fit.aic_raw;
                rec.metrics.aic_per_obs = fit.aic_per_obs;
            }
            rec.forecast_levels = levels;
            rec.metrics.mae_per_horizon = mae(grid.test_levels, levels, HorizonMode::per_horizon);
            rec.metrics.mae_cumulative = mae(grid.test_levels, levels, HorizonMode::cumulative);
            rec.metrics.rmse_per_horizon = rmse(grid.test_levels, levels, HorizonMode::per_horizon);
            rec.metrics.rmse_cumulative = rmse(grid.test_levels, levels, HorizonMode::cumulative);
        } catch (const Error& e) {
            rec.metrics.error = e.what();
            rec.metrics.converged = false;
        }
    };

    const int n_fits = static_cast<int>(fits.size());
    int threads_used = 1;
#ifdef _OPENMP
    if (config.threads != 1) {
        const int requested = config.threads > 0 ? config.threads : omp_get_max_threads();
        threads_used = std::max(1, requested);
#pragma omp parallel for schedule(dynamic) num_threads(threads_used)
        for (int i = 0; i < n_fits; ++i) {
            run_one(fits[static_cast<std::size_t>(i)]);
        }
    } else {
        for (int i = 0; i < n_fits; ++i) {
            run_one(fits[static_cast<std::size_t>(i)]);
        }
    }
#else
    for (int i = 0; i < n_fits; ++i) {
        run_one(fits[static_cast<std::size_t>(i)]);
    }
#endif
    grid.threads_used = threads_used;
    grid.fits = std::move(fits);

    // --- materialize the table positions ------------------------------------
    auto index_of = [&](const std::string& key) {
        for (std::size_t i = 0; i < grid.fits.size(); ++i) {
            if (grid.fits[i].key == key) {
                return static_cast<int>(i);
            }
        }
        throw FitError("internal: missing fit record " + key);
    };
    for (GarchFamily family : kFamilies) {
        for (RegressorAlignment alignment : kAlignments) {
            for (RiskVariant rv : kVariants) {
                for (ModelKind model : kModels) {
                    GridCell cell;
                    cell.family_block = family;
                    cell.alignment = alignment;
                    cell.rv_block = rv;
                    cell.model = model;
                    cell.fit_index = index_of(fit_key(model, family, rv, alignment));
                    grid.cells.push_back(cell);
                }
            }
        }
    }
    return grid;
}

}  // namespace rainrisk
