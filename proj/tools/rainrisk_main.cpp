// rainrisk command-line interface: rainfall-risk regressors, unit-root
// checks, single model fits and the full evaluation grid.

#include "rainrisk/errors.hpp"
#include "rainrisk/evaluate.hpp"
#include "rainrisk/garch.hpp"
#include "rainrisk/io.hpp"
#include "rainrisk/mean_model.hpp"
#include "rainrisk/risk.hpp"
#include "rainrisk/stat_tests.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rainrisk;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitFit = 3;
constexpr int kExitIo = 4;

struct OrderArg {
    bool set = false;
    int p = 0;
    int d = 1;
    int q = 0;
};

void parse_order(const std::string& text, OrderArg& order) {
    int p = 0;
    int d = 0;
    int q = 0;
    if (std::sscanf(text.c_str(), "%d,%d,%d", &p, &d, &q) != 3 || p < 0 || d < 0 || q < 0) {
        throw ValidationError("--order expects 'p,d,q' with non-negative integers, got '" + text +
                              "'");
    }
    order.set = true;
    order.p = p;
    order.d = d;
    order.q = q;
}

json mean_fit_to_json(const MeanFit& fit) {
    json j;
    j["model"] = fit.spec.exog_count > 0 ? "ARIMAX" : "ARIMA";
    j["order"] = {{"p", fit.spec.p}, {"d", fit.spec.d}, {"q", fit.spec.q},
                  {"constant", fit.spec.include_constant}};
    j["params"] = {{"constant", fit.params.constant},
                   {"ar", fit.params.ar},
                   {"ma", fit.params.ma},
                   {"exog", fit.params.exog}};
    j["sigma2"] = fit.sigma2;
    j["loglik"] = fit.loglik;
    j["aic_raw"] = fit.aic_raw;
    j["aic_per_obs"] = fit.aic_per_obs;
    j["converged"] = fit.converged;
    if (!fit.message.empty()) {
        j["note"] = fit.message;
    }
    return j;
}

json garch_fit_to_json(const GarchFit& fit) {
    json j;
    j["model"] = fit.mean_spec.exog_count > 0 ? "GARCH-ARIMAX" : "GARCH-ARIMA";
    j["family"] = to_string(fit.var_spec.family);
    j["order"] = {{"p", fit.mean_spec.p}, {"d", fit.mean_spec.d}, {"q", fit.mean_spec.q},
                  {"constant", fit.mean_spec.include_constant}};
    j["garch_order"] = {{"r", fit.var_spec.r}, {"s", fit.var_spec.s}};
    j["mean_params"] = {{"constant", fit.mean_params.constant},
                        {"ar", fit.mean_params.ar},
                        {"ma", fit.mean_params.ma},
                        {"exog", fit.mean_params.exog}};
    j["variance_params"] = {{"omega", fit.var_params.omega},
                            {"alpha", fit.var_params.alpha},
                            {"beta", fit.var_params.beta},
                            {"gamma", fit.var_params.gamma_asym}};
    j["init_sigma2"] = fit.init_sigma2;
    j["loglik"] = fit.loglik;
    j["aic_raw"] = fit.aic_raw;
    j["aic_per_obs"] = fit.aic_per_obs;
    j["converged"] = fit.converged;
    j["near_boundary"] = fit.near_boundary;
    if (!fit.message.empty()) {
        j["note"] = fit.message;
    }
    return j;
}

void write_trace_csv(const std::string& path, const std::vector<OptTracePoint>& trace) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open " + path + " for writing");
    }
    out << "start,eval,f\n";
    for (const auto& point : trace) {
        char buf[80];
        std::snprintf(buf, sizeof(buf), "%d,%d,%.10g\n", point.start, point.eval, point.f);
        out << buf;
    }
}

struct FitArgs {
    std::string production;
    std::string rainfall;
    std::string rv;
    std::string alignment = "lag1";
    std::string variance = "none";
    std::string order_text;
    std::string garch_order_text;
    int holdout = 0;
    int horizon = 3;
    double floor_mm = 0.1;
    bool rv4_sqrt = false;
    bool no_constant = false;
    int max_order = 2;
    std::uint64_t seed = 0;
    int opt_max_evals = 20000;
    double opt_tol = 1e-9;
    std::string opt_trace;
};

void add_fit_options(CLI::App* cmd, FitArgs& args) {
    cmd->add_option("--production", args.production, "production CSV")->required();
    cmd->add_option("--rainfall", args.rainfall, "rainfall CSV (needed with --rv)");
    cmd->add_option("--rv", args.rv, "exogenous risk measure: rv1|rv2|rv3|rv4");
    cmd->add_option("--alignment", args.alignment, "lag1|same_time (default lag1)")
        ->check(CLI::IsMember({"lag1", "same_time"}));
    cmd->add_option("--variance", args.variance,
                    "none|sGARCH|eGARCH|gjrGARCH|iGARCH (default none)");
    cmd->add_option("--order", args.order_text, "fixed mean order 'p,d,q'");
    cmd->add_option("--max-order", args.max_order, "AIC search bound when --order is absent");
    cmd->add_flag("--no-constant", args.no_constant, "drop the constant term");
    cmd->add_option("--garch-order", args.garch_order_text, "variance order 'r,s' (default 1,1)");
    cmd->add_option("--holdout", args.holdout, "reserve this many trailing years");
    cmd->add_option("--floor-mm", args.floor_mm, "lower bound before log-ratios");
    cmd->add_flag("--rv4-sqrt", args.rv4_sqrt, "use sqrt of rv4 as the regressor");
    cmd->add_option("--seed", args.seed, "optimizer seed");
    cmd->add_option("--opt-max-evals", args.opt_max_evals, "objective evaluation budget");
    cmd->add_option("--opt-tol", args.opt_tol, "optimizer x-tolerance");
    cmd->add_option("--opt-trace", args.opt_trace, "write optimizer trace CSV here");
}

// Shared context for fit/forecast: ingest, split, difference, align, order.
struct ModelRun {
    DifferencedSeries train;
    ExogRows exog;
    ExogRows future_exog;
    MeanSpec spec;
    std::vector<double> test_levels;
};

ModelRun prepare_model_run(const FitArgs& args, int horizon, const FitOptions& opt) {
    std::vector<std::string> warnings;
    const AnnualSeries production = ingest_production(args.production, &warnings);
    for (const auto& w : warnings) {
        std::cerr << "warning: " << w << "\n";
    }

    ModelRun run;
    AnnualSeries train_levels = production;
    if (args.holdout > 0) {
        SplitConfig split_cfg;
        split_cfg.holdout = args.holdout;
        auto [tr, te] = split(production, split_cfg);
        train_levels = tr;
        run.test_levels = te.values;
    }

    OrderArg order;
    if (!args.order_text.empty()) {
        parse_order(args.order_text, order);
    }
    const int d = order.set ? order.d : 1;
    run.train = difference(train_levels, d);

    if (!args.rv.empty()) {
        if (args.rainfall.empty()) {
            throw ValidationError("--rv needs --rainfall");
        }
        const MonthlyRainfallSeries rainfall = ingest_rainfall(args.rainfall);
        RiskOptions risk;
        risk.floor_mm = args.floor_mm;
        risk.rv4_sqrt = args.rv4_sqrt;
        const AnnualSeries regressor =
            build_regressor(rainfall, risk_variant_from_string(args.rv), risk);
        const int lag = (args.alignment == "lag1") ? 1 : 0;
        const AlignedPair pair = align(run.train.as_annual(), regressor, lag);
        if (pair.production.size() != run.train.size()) {
            throw ValidationError("rainfall years do not cover the training window at alignment " +
                                  args.alignment);
        }
        for (double v : pair.regressor.values) {
            run.exog.push_back({v});
        }
        const int last_train_year = run.train.start_year() + run.train.size() - 1;
        for (int step = 1; step <= horizon; ++step) {
            const int year = last_train_year + step - lag;
            if (!regressor.covers_year(year)) {
                throw ValidationError("forecast step " + std::to_string(step) +
                                      " needs rainfall year " + std::to_string(year) +
                                      ", not in the panel");
            }
            run.future_exog.push_back({regressor.value_at_year(year)});
        }
    }

    const int exog_count = run.exog.empty() ? 0 : 1;
    if (order.set) {
        run.spec.p = order.p;
        run.spec.d = order.d;
        run.spec.q = order.q;
        run.spec.include_constant = !args.no_constant;
        run.spec.exog_count = exog_count;
    } else {
        run.spec =
            select_order(run.train, run.exog, !args.no_constant, exog_count, args.max_order, opt);
    }
    return run;
}

int run_fit_like(const FitArgs& args, bool do_forecast) {
    FitOptions opt;
    opt.max_evals = args.opt_max_evals;
    opt.tol_x = args.opt_tol;
    opt.seed = args.seed;
    opt.record_trace = !args.opt_trace.empty();

    int garch_r = 1;
    int garch_s = 1;
    if (!args.garch_order_text.empty() &&
        std::sscanf(args.garch_order_text.c_str(), "%d,%d", &garch_r, &garch_s) != 2) {
        throw ValidationError("--garch-order expects 'r,s'");
    }

    const int horizon = do_forecast ? args.horizon : 0;
    const ModelRun run = prepare_model_run(args, horizon, opt);

    json j;
    std::vector<OptTracePoint> trace;
    std::vector<double> mean_levels;
    std::vector<double> variance_fc;
    if (args.variance == "none") {
        const MeanFit fit = fit_mean(run.spec, run.train, run.exog, opt);
        j = mean_fit_to_json(fit);
        trace = fit.opt_trace;
        if (do_forecast) {
            const MeanForecast fc = forecast_mean(fit, horizon, run.future_exog);
            mean_levels = fc.levels;
            j["forecast_differenced"] = fc.differenced;
        }
    } else {
        VarianceSpec vspec;
        vspec.family = garch_family_from_string(args.variance);
        vspec.r = garch_r;
        vspec.s = garch_s;
        const GarchFit fit = fit_garch(run.spec, vspec, run.train, run.exog, opt);
        j = garch_fit_to_json(fit);
        trace = fit.opt_trace;
        if (do_forecast) {
            const GarchForecast fc = forecast_garch(fit, horizon, run.future_exog);
            mean_levels = fc.mean_levels;
            variance_fc = fc.variance;
            j["forecast_differenced"] = fc.mean_differenced;
        }
    }
    if (do_forecast) {
        j["forecast_levels"] = mean_levels;
        if (!variance_fc.empty()) {
            j["forecast_variance"] = variance_fc;
        }
        if (static_cast<int>(run.test_levels.size()) >= horizon) {
            const std::vector<double> actual(run.test_levels.begin(),
                                             run.test_levels.begin() + horizon);
            j["holdout_actual"] = actual;
            j["mae_per_horizon"] = mae(actual, mean_levels, HorizonMode::per_horizon);
            j["mae_cumulative"] = mae(actual, mean_levels, HorizonMode::cumulative);
            j["rmse_per_horizon"] = rmse(actual, mean_levels, HorizonMode::per_horizon);
            j["rmse_cumulative"] = rmse(actual, mean_levels, HorizonMode::cumulative);
        }
    }
    if (!args.opt_trace.empty()) {
        write_trace_csv(args.opt_trace, trace);
    }
    std::cout << j.dump(2) << "\n";
    return 0;
}

int run_rv(const std::string& rainfall_path, const std::string& variant, double floor_mm,
           bool rv4_sqrt, const std::string& out_dir) {
    const MonthlyRainfallSeries rainfall = ingest_rainfall(rainfall_path);
    RiskOptions risk;
    risk.floor_mm = floor_mm;
    risk.rv4_sqrt = rv4_sqrt;
    std::vector<RiskVariant> variants;
    if (variant == "all") {
        variants = {RiskVariant::rv1, RiskVariant::rv2, RiskVariant::rv3, RiskVariant::rv4};
    } else {
        variants = {risk_variant_from_string(variant)};
    }
    for (RiskVariant v : variants) {
        const AnnualSeries series = build_regressor(rainfall, v, risk);
        std::string csv = "year,";
        csv += to_string(v);
        csv += "\n";
        for (int i = 0; i < series.size(); ++i) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%d,%.10g\n", series.start_year + i,
                          series.values[static_cast<std::size_t>(i)]);
            csv += buf;
        }
        if (out_dir.empty()) {
            std::cout << csv;
        } else {
            fs::create_directories(out_dir);
            const fs::path path = fs::path(out_dir) / (std::string(to_string(v)) + ".csv");
            std::ofstream out(path);
            if (!out) {
                throw IoError("cannot write " + path.string());
            }
            out << csv;
            std::cout << "wrote " << path.string() << "\n";
        }
    }
    return 0;
}

int run_adf(const std::string& production_path, int diff, const std::string& regression_name,
            int max_lag) {
    std::vector<std::string> warnings;
    const AnnualSeries series = ingest_production(production_path, &warnings);
    for (const auto& w : warnings) {
        std::cerr << "warning: " << w << "\n";
    }
    std::vector<double> values = series.values;
    if (diff > 0) {
        values = difference(series, diff).values;
    }
    AdfRegression regression = AdfRegression::constant;
    if (regression_name == "trend" || (regression_name == "auto" && diff == 0)) {
        regression = AdfRegression::constant_trend;
    } else if (regression_name != "constant" && regression_name != "auto") {
        throw ValidationError("--regression must be constant, trend or auto");
    }
    const AdfResult result = adf_test(values, max_lag, regression);
    json j;
    j["statistic"] = result.statistic;
    j["p_value"] = result.p_value;
    j["p_clamped"] = result.p_clamped;
    j["lags_used"] = result.lags_used;
    j["regression"] = result.regression == AdfRegression::constant ? "constant" : "constant+trend";
    j["n_effective"] = result.n_effective;
    j["differenced"] = diff;
    std::cout << j.dump(2) << "\n";
    return 0;
}

int run_grid_cmd(RunConfig config, const std::string& order_text, const std::string& out_dir) {
    if (!order_text.empty()) {
        OrderArg order;
        parse_order(order_text, order);
        config.order_override = true;
        config.p = order.p;
        config.d = order.d;
        config.q = order.q;
    }
    const MonthlyRainfallSeries rainfall = ingest_rainfall(config.rainfall_path);
    std::vector<std::string> warnings;
    const AnnualSeries production = ingest_production(config.production_path, &warnings);
    for (const auto& w : warnings) {
        std::cerr << "warning: " << w << "\n";
    }
    const EvaluationGrid grid = run_grid(production, rainfall, config.to_grid_config());
    const ReportBundle bundle = emit_reports(grid, config, out_dir);
    int failures = 0;
    for (const FitRecord& rec : grid.fits) {
        if (!rec.metrics.error.empty()) {
            ++failures;
            std::cerr << "cell " << rec.key << " failed: " << rec.metrics.error << "\n";
        }
    }
    std::cout << "bundle written to " << bundle.directory.string() << " (config "
              << bundle.config_hash << ", " << grid.fits.size() << " fits, " << failures
              << " failures)\n";
    if (failures > 0 && config.strict) {
        return kExitFit;
    }
    return 0;
}

int run_report(const std::string& meta_path, const std::string& out_dir) {
    const RunConfig config = run_config_from_meta(meta_path);
    const MonthlyRainfallSeries rainfall = ingest_rainfall(config.rainfall_path);
    std::vector<std::string> warnings;
    const AnnualSeries production = ingest_production(config.production_path, &warnings);
    const EvaluationGrid grid = run_grid(production, rainfall, config.to_grid_config());
    const ReportBundle bundle = emit_reports(grid, config, out_dir);
    std::cout << "bundle written to " << bundle.directory.string() << " (config "
              << bundle.config_hash << ")\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rainfall-risk measures and rice-production forecasting toolkit"};
    app.require_subcommand(1);

    auto* rv_cmd = app.add_subcommand("rv", "compute rainfall-risk regressor series");
    std::string rv_rainfall;
    std::string rv_variant = "all";
    double rv_floor = 0.1;
    bool rv_sqrt = false;
    std::string rv_out;
    rv_cmd->add_option("--rainfall", rv_rainfall, "rainfall CSV (year,month,rainfall_mm)")
        ->required();
    rv_cmd->add_option("--rv", rv_variant, "rv1|rv2|rv3|rv4|all (default all)");
    rv_cmd->add_option("--floor-mm", rv_floor, "lower bound before log-ratios");
    rv_cmd->add_flag("--rv4-sqrt", rv_sqrt, "report sqrt of rv4");
    rv_cmd->add_option("--out", rv_out, "directory for rv*.csv files (stdout if omitted)");

    auto* adf_cmd = app.add_subcommand("adf", "augmented Dickey-Fuller unit-root test");
    std::string adf_production;
    int adf_diff = 0;
    std::string adf_regression = "auto";
    int adf_max_lag = -1;
    adf_cmd->add_option("--production", adf_production, "production CSV (year,production)")
        ->required();
    adf_cmd->add_option("--diff", adf_diff, "difference the series this many times first");
    adf_cmd->add_option("--regression", adf_regression,
                        "constant|trend|auto (auto: trend for levels, constant otherwise)");
    adf_cmd->add_option("--max-lag", adf_max_lag, "augmentation lags (default: (n-1)^(1/3))");

    auto* fit_cmd = app.add_subcommand("fit", "estimate one model and print it as JSON");
    FitArgs fit_args;
    add_fit_options(fit_cmd, fit_args);

    auto* forecast_cmd =
        app.add_subcommand("forecast", "estimate one model and forecast 1..h steps ahead");
    FitArgs forecast_args;
    forecast_args.holdout = 3;
    add_fit_options(forecast_cmd, forecast_args);
    forecast_cmd->add_option("--horizon", forecast_args.horizon, "steps ahead (default 3)");

    auto* grid_cmd =
        app.add_subcommand("grid", "run the full model-comparison grid and write a bundle");
    RunConfig grid_args;
    std::string grid_order_text;
    std::string grid_out;
    grid_cmd->add_option("--rainfall", grid_args.rainfall_path, "rainfall CSV")->required();
    grid_cmd->add_option("--production", grid_args.production_path, "production CSV")->required();
    grid_cmd->add_option("--holdout", grid_args.holdout, "test years (default 3)");
    grid_cmd->add_option("--floor-mm", grid_args.floor_mm, "lower bound before log-ratios");
    grid_cmd->add_flag("--rv4-sqrt", grid_args.rv4_sqrt, "use sqrt of rv4 as the regressor");
    grid_cmd->add_option("--order", grid_order_text, "fixed mean order 'p,d,q'");
    grid_cmd->add_option("--max-order", grid_args.max_order, "AIC search bound");
    grid_cmd->add_option("--seed", grid_args.seed, "optimizer seed");
    grid_cmd->add_option("--threads", grid_args.threads,
                         "fit workers; 1 = serial reference, 0 = all cores");
    grid_cmd->add_option("--opt-max-evals", grid_args.opt_max_evals, "objective evaluation budget");
    grid_cmd->add_option("--opt-tol", grid_args.opt_tol, "optimizer x-tolerance");
    grid_cmd->add_flag("--strict", grid_args.strict, "exit 3 when any cell fails to fit");
    grid_cmd->add_option("--out", grid_out, "bundle output directory")->required();

    auto* report_cmd = app.add_subcommand("report", "re-run a grid from a bundle's run_meta.json");
    std::string report_meta;
    std::string report_out;
    report_cmd->add_option("--meta", report_meta, "path to run_meta.json")->required();
    report_cmd->add_option("--out", report_out, "bundle output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        if (rv_cmd->parsed()) {
            return run_rv(rv_rainfall, rv_variant, rv_floor, rv_sqrt, rv_out);
        }
        if (adf_cmd->parsed()) {
            return run_adf(adf_production, adf_diff, adf_regression, adf_max_lag);
        }
        if (fit_cmd->parsed()) {
            return run_fit_like(fit_args, false);
        }
        if (forecast_cmd->parsed()) {
            return run_fit_like(forecast_args, true);
        }
        if (grid_cmd->parsed()) {
            return run_grid_cmd(grid_args, grid_order_text, grid_out);
        }
        if (report_cmd->parsed()) {
            return run_report(report_meta, report_out);
        }
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const FitError& e) {
        std::cerr << "fit error: " << e.what() << "\n";
        return kExitFit;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
