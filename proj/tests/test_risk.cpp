#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rainrisk/errors.hpp"
#include "rainrisk/io.hpp"
#include "rainrisk/risk.hpp"
#include "support/oracles.hpp"
#include "support/sim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

using namespace rainrisk;

namespace {

MonthlyRainfallSeries constant_panel(int years, double mm) {
    std::array<double, 12> row;
    row.fill(mm);
    return MonthlyRainfallSeries(2000, std::vector<std::array<double, 12>>(
                                           static_cast<std::size_t>(years), row));
}

// months alternate mm_a, mm_b, ... within every year
MonthlyRainfallSeries alternating_panel(int years, double mm_a, double mm_b) {
    std::array<double, 12> row;
    for (int m = 0; m < 12; ++m) {
        row[static_cast<std::size_t>(m)] = (m % 2 == 0) ? mm_a : mm_b;
    }
    return MonthlyRainfallSeries(2000, std::vector<std::array<double, 12>>(
                                           static_cast<std::size_t>(years), row));
}

}  // namespace

TEST_CASE("log_diffs: constant rainfall gives zeros, first year has 11 ratios") {
    const MonthlyRainfallSeries panel = constant_panel(3, 100.0);
    const LogDiffYear first = log_diffs(panel, 0, 0.1);
    CHECK(first.diffs.size() == 11);
    const LogDiffYear interior = log_diffs(panel, 1, 0.1);
    CHECK(interior.diffs.size() == 12);
    for (double d : interior.diffs) {
        CHECK(d == doctest::Approx(0.0).epsilon(1e-15));
    }
    CHECK_THROWS_AS(log_diffs(panel, 3, 0.1), ValidationError);
    CHECK_THROWS_AS(log_diffs(panel, 0, 0.0), ValidationError);
}

TEST_CASE("log_diffs: alternating rainfall gives +-log 2") {
    const MonthlyRainfallSeries panel = alternating_panel(2, 100.0, 200.0);
    const LogDiffYear ld = log_diffs(panel, 1, 0.1);
    REQUIRE(ld.diffs.size() == 12);
    // December of the previous year is 200, January is 100
    CHECK(ld.diffs[0] == doctest::Approx(-std::log(2.0)).epsilon(1e-14));
    for (std::size_t i = 1; i < 12; ++i) {
        const double expected = (i % 2 == 1) ? std::log(2.0) : -std::log(2.0);
        CHECK(ld.diffs[i] == doctest::Approx(expected).epsilon(1e-14));
    }
}

TEST_CASE("log_diffs: zero months stay finite through the floor") {
    std::array<double, 12> row = {0, 0, 0, 0, 50, 150, 300, 250, 100, 20, 0, 0};
    const MonthlyRainfallSeries panel(2000, {row, row});
    const LogDiffYear ld = log_diffs(panel, 1, 0.1);
    for (double d : ld.diffs) {
        CHECK(std::isfinite(d));
    }
    // a zero month against the floor: log(50 / 0.1)
    CHECK(ld.diffs[4] == doctest::Approx(std::log(50.0 / 0.1)).epsilon(1e-14));
}

TEST_CASE("rv1: constant, zero and arithmetic-progression months") {
    CHECK(rv1(constant_panel(1, 100.0), 0) == doctest::Approx(100.0 * std::sqrt(12.0)));
    CHECK(rv1(constant_panel(1, 0.0), 0) == 0.0);

    std::array<double, 12> months;
    for (int m = 0; m < 12; ++m) {
        months[static_cast<std::size_t>(m)] = 10.0 * (m + 1);
    }
    const MonthlyRainfallSeries panel(2000, {months});
    CHECK(rv1(panel, 0) == doctest::Approx(10.0 * std::sqrt(650.0)).epsilon(1e-12));
    CHECK(rv1(panel, 0) == doctest::Approx(oracle::rv1(months)).epsilon(1e-14));
}

TEST_CASE("rv2: dispersion with divisor 12, not 11") {
    CHECK(rv2(constant_panel(1, 77.0), 0) == 0.0);

    std::array<double, 12> half;
    for (int m = 0; m < 12; ++m) {
        half[static_cast<std::size_t>(m)] = (m < 6) ? 0.0 : 200.0;
    }
    CHECK(rv2(MonthlyRainfallSeries(2000, {half}), 0) == doctest::Approx(100.0).epsilon(1e-14));

    const std::array<double, 12> months = {0, 0, 0, 0, 50, 150, 300, 250, 100, 20, 0, 0};
    const MonthlyRainfallSeries panel(2000, {months});
    CHECK(rv2(panel, 0) == doctest::Approx(oracle::rv2(months)).epsilon(1e-14));
    CHECK(rv2(panel, 0) != doctest::Approx(oracle::rv2(months, 11.0)).epsilon(1e-6));
}

TEST_CASE("rv3: constant and doubling months") {
    CHECK(rv3(constant_panel(3, 123.0), 1, 0.1) == doctest::Approx(0.0).epsilon(1e-14));

    // rainfall doubling month over month, including across the year boundary
    std::vector<std::array<double, 12>> rows(2);
    double v = 1.0;
    for (auto& row : rows) {
        for (int m = 0; m < 12; ++m) {
            row[static_cast<std::size_t>(m)] = v;
            v *= 2.0;
        }
    }
    const MonthlyRainfallSeries panel(2000, rows);
    CHECK(rv3(panel, 1, 1e-9) ==
          doctest::Approx(std::log(2.0) * std::sqrt(12.0)).epsilon(1e-12));
}

TEST_CASE("rv4: alternating rainfall gives (log 2)^2") {
    const MonthlyRainfallSeries panel = alternating_panel(2, 100.0, 200.0);
    const double expected = std::log(2.0) * std::log(2.0);
    CHECK(rv4(panel, 1, 0.1) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(rv4(constant_panel(2, 5.0), 1, 0.1) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("rv measures match the direct-formula oracles on random panels") {
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
        const auto rows = sim::rainfall_panel(6, seed);
        const MonthlyRainfallSeries panel(1990, rows);
        for (int year = 0; year < panel.size(); ++year) {
            const auto y = static_cast<std::size_t>(year);
            CHECK(rv1(panel, year) == doctest::Approx(oracle::rv1(rows[y])).epsilon(1e-12));
            CHECK(rv2(panel, year) == doctest::Approx(oracle::rv2(rows[y])).epsilon(1e-12));
            CHECK(rv3(panel, year, 0.1) ==
                  doctest::Approx(oracle::rv3(rows, y, 0.1)).epsilon(1e-12));
            CHECK(rv4(panel, year, 0.1) ==
                  doctest::Approx(oracle::rv4(rows, y, 0.1)).epsilon(1e-12));
        }
    }
}

TEST_CASE("scale laws: rv1/rv2 homogeneous, rv3/rv4 scale-invariant") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        auto rows = sim::rainfall_panel(4, seed, 0.0);  // keep all months positive
        for (auto& row : rows) {
            for (double& v : row) {
                v = std::max(v, 1.0);  // stay clear of the floor before and after scaling
            }
        }
        const MonthlyRainfallSeries panel(1990, rows);
        const double c = 3.25;
        auto scaled_rows = rows;
        for (auto& row : scaled_rows) {
            for (double& v : row) {
                v *= c;
            }
        }
        const MonthlyRainfallSeries scaled(1990, scaled_rows);
        for (int year = 0; year < panel.size(); ++year) {
            CHECK(rv1(scaled, year) == doctest::Approx(c * rv1(panel, year)).epsilon(1e-12));
            CHECK(rv2(scaled, year) == doctest::Approx(c * rv2(panel, year)).epsilon(1e-12));
            CHECK(rv3(scaled, year, 0.1) ==
                  doctest::Approx(rv3(panel, year, 0.1)).epsilon(1e-10));
            CHECK(rv4(scaled, year, 0.1) ==
                  doctest::Approx(rv4(panel, year, 0.1)).epsilon(1e-10));
        }
    }
}

TEST_CASE("permutation sensitivity: rv1/rv2 invariant, rv3/rv4 not") {
    const std::array<double, 12> months = {5, 10, 40, 80, 200, 400, 350, 150, 90, 30, 12, 6};
    std::array<double, 12> permuted = months;
    std::swap(permuted[0], permuted[5]);
    std::swap(permuted[3], permuted[9]);
    const MonthlyRainfallSeries a(2000, {months, months});
    const MonthlyRainfallSeries b(2000, {permuted, permuted});
    CHECK(rv1(a, 1) == doctest::Approx(rv1(b, 1)).epsilon(1e-14));
    CHECK(rv2(a, 1) == doctest::Approx(rv2(b, 1)).epsilon(1e-14));
    CHECK(std::abs(rv3(a, 1, 0.1) - rv3(b, 1, 0.1)) > 1e-6);
    CHECK(std::abs(rv4(a, 1, 0.1) - rv4(b, 1, 0.1)) > 1e-8);
}

TEST_CASE("non-negativity and zero conditions") {
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        const MonthlyRainfallSeries panel(1990, sim::rainfall_panel(5, seed));
        for (int year = 0; year < panel.size(); ++year) {
            CHECK(rv1(panel, year) >= 0.0);
            CHECK(rv2(panel, year) >= 0.0);
            CHECK(rv3(panel, year, 0.1) >= 0.0);
            CHECK(rv4(panel, year, 0.1) >= 0.0);
        }
    }
}

TEST_CASE("build_regressor: year indexing, positivity and rv4_sqrt option") {
    const MonthlyRainfallSeries constant = constant_panel(3, 50.0);
    const AnnualSeries rv2_series = build_regressor(constant, RiskVariant::rv2);
    CHECK(rv2_series.values == std::vector<double>{0, 0, 0});
    CHECK(rv2_series.start_year == 2000);

    const MonthlyRainfallSeries panel(1995, sim::rainfall_panel(6, 11));
    const AnnualSeries rv1_series = build_regressor(panel, RiskVariant::rv1);
    for (double v : rv1_series.values) {
        CHECK(v > 0.0);
    }

    RiskOptions sqrt_opt;
    sqrt_opt.rv4_sqrt = true;
    const AnnualSeries plain = build_regressor(panel, RiskVariant::rv4);
    const AnnualSeries rooted = build_regressor(panel, RiskVariant::rv4, sqrt_opt);
    for (int i = 0; i < plain.size(); ++i) {
        CHECK(rooted.values[static_cast<std::size_t>(i)] ==
              doctest::Approx(std::sqrt(plain.values[static_cast<std::size_t>(i)])).epsilon(1e-12));
    }
}

TEST_CASE("rv3 regressor on the bundled panel: frozen regression constants") {
    const MonthlyRainfallSeries panel =
        ingest_rainfall(std::string(RAINRISK_DATA_DIR) + "/sample_rainfall.csv");
    const AnnualSeries rv3_series = build_regressor(panel, RiskVariant::rv3);
    CHECK(rv3_series.size() == 59);
    CHECK(rv3_series.start_year == 1962);
    double mean = 0.0;
    double max = 0.0;
    for (double v : rv3_series.values) {
        CHECK(std::isfinite(v));
        mean += v;
        max = std::max(max, v);
    }
    mean /= rv3_series.size();
    // computed once from the checked-in fixture and frozen
    CHECK(mean == doctest::Approx(6.7735303912260161).epsilon(1e-12));
    CHECK(max == doctest::Approx(10.215731835110565).epsilon(1e-12));
}

TEST_CASE("floor robustness: all-zero dry panel stays finite") {
    std::array<double, 12> row{};
    row[6] = 500.0;  // one wet month, eleven zero months
    const MonthlyRainfallSeries panel(2000, {row, row, row});
    for (RiskVariant v :
         {RiskVariant::rv1, RiskVariant::rv2, RiskVariant::rv3, RiskVariant::rv4}) {
        const AnnualSeries series = build_regressor(panel, v);
        for (double x : series.values) {
            CHECK(std::isfinite(x));
        }
    }
}
