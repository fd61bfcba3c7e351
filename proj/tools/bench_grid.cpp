// Times the evaluation grid on the bundled sample data: serial reference
// pass against the OpenMP pass, with a result-equality check.

#include "rainrisk/evaluate.hpp"
#include "rainrisk/io.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>

using namespace rainrisk;

namespace {

double run_once(const AnnualSeries& production, const MonthlyRainfallSeries& rainfall,
                int threads, EvaluationGrid& out) {
    GridConfig config;
    config.threads = threads;
    const auto t0 = std::chrono::steady_clock::now();
    out = run_grid(production, rainfall, config);
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count();
}

bool grids_equal(const EvaluationGrid& a, const EvaluationGrid& b) {
    if (a.fits.size() != b.fits.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.fits.size(); ++i) {
        const auto& fa = a.fits[i];
        const auto& fb = b.fits[i];
        if (fa.key != fb.key || fa.loglik != fb.loglik ||
            fa.metrics.aic_raw != fb.metrics.aic_raw ||
            fa.metrics.mae_cumulative != fb.metrics.mae_cumulative ||
            fa.forecast_levels != fb.forecast_levels) {
            return false;
        }
    }
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    std::string rainfall_path = "data/sample_rainfall.csv";
    std::string production_path = "data/sample_production.csv";
    if (argc >= 3) {
        rainfall_path = argv[1];
        production_path = argv[2];
    }

    try {
        const MonthlyRainfallSeries rainfall = ingest_rainfall(rainfall_path);
        const AnnualSeries production = ingest_production(production_path);

        EvaluationGrid serial_grid;
        EvaluationGrid parallel_grid;
        const double t_serial = run_once(production, rainfall, 1, serial_grid);
        const double t_parallel = run_once(production, rainfall, 0, parallel_grid);

        std::printf("fits per pass     %zu\n", serial_grid.fits.size());
        std::printf("serial            %.3f s\n", t_serial);
        std::printf("parallel (%2d)     %.3f s\n", parallel_grid.threads_used, t_parallel);
        std::printf("speedup           %.2fx\n", t_serial / t_parallel);
        bool equal = grids_equal(serial_grid, parallel_grid);
        if (parallel_grid.threads_used == 1) {
            // single-core host: still exercise the concurrent path by
            // oversubscribing workers
            EvaluationGrid oversubscribed;
            run_once(production, rainfall, 4, oversubscribed);
            equal = equal && grids_equal(serial_grid, oversubscribed);
            std::printf("oversubscribed 4-worker pass checked\n");
        }
        std::printf("results identical %s\n", equal ? "yes" : "NO");
        return equal ? 0 : 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "bench failed: %s\n", e.what());
        return 1;
    }
}
