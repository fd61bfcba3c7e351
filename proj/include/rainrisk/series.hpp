#pragma once

#include <array>
#include <string>
#include <vector>

namespace rainrisk {

/**
 * Year-indexed scalar series with no gaps: values[i] belongs to calendar
 * year start_year + i. Every series in the toolkit carries its own year
 * indexing; alignment between series is always done through years, never
 * through raw positions.
 */
struct AnnualSeries {
    int start_year = 0;
    std::vector<double> values;
    std::string unit_label;

    AnnualSeries() = default;
    AnnualSeries(int start_year, std::vector<double> values, std::string unit_label = "");

    int size() const { return static_cast<int>(values.size()); }
    int last_year() const { return start_year + size() - 1; }
    bool covers_year(int year) const { return year >= start_year && year <= last_year(); }
    double value_at_year(int year) const;
};

/**
 * Monthly rainfall panel: one 12-vector of depths (mm) per consecutive
 * calendar year. Entries must be finite and non-negative; missing months
 * are a hard error at construction.
 */
struct MonthlyRainfallSeries {
    int start_year = 0;
    std::vector<std::array<double, 12>> rows;

    MonthlyRainfallSeries() = default;
    MonthlyRainfallSeries(int start_year, std::vector<std::array<double, 12>> rows);

    int size() const { return static_cast<int>(rows.size()); }
    int last_year() const { return start_year + size() - 1; }
};

/**
 * Result of d-fold first differencing of an AnnualSeries. Keeps the d
 * trailing levels of the source series so forecasts made on the
 * differenced scale can be mapped back to levels, and so the source
 * series can be reconstructed exactly.
 *
 * values[i] belongs to year start_year() + i, where the first differenced
 * observation sits at base_start_year + order.
 */
struct DifferencedSeries {
    int base_start_year = 0;
    int order = 0;
    std::vector<double> values;
    std::vector<double> tail_levels;  // last `order` levels of the base series
    std::string unit_label;

    int start_year() const { return base_start_year + order; }
    int size() const { return static_cast<int>(values.size()); }

    AnnualSeries as_annual() const;

    /// Rebuilds the full base series by backward integration from the
    /// stored trailing levels.
    std::vector<double> reconstruct_base() const;
};

/// Production/regressor pair aligned over a common year window; both
/// series are indexed by the production year t, with the regressor value
/// taken from year t - lag.
struct AlignedPair {
    AnnualSeries production;
    AnnualSeries regressor;
    int lag = 0;
};

/**
 * d-th order forward differencing. Throws ValidationError when
 * d >= series length.
 */
DifferencedSeries difference(const AnnualSeries& series, int order);

/**
 * Integrates a run of d-th order differences forward. `last_levels` holds
 * the d levels immediately preceding the first difference, oldest first;
 * the result has one level per difference. With d = 0 the input is
 * returned unchanged.
 */
std::vector<double> integrate(const std::vector<double>& diffs,
                              const std::vector<double>& last_levels,
                              int order);

/**
 * Pairs production years t with regressor years t - lag over the maximal
 * common window. lag must be 0 or 1. Throws ValidationError when the
 * overlap is empty.
 */
AlignedPair align(const AnnualSeries& production, const AnnualSeries& regressor, int lag);

}  // namespace rainrisk
