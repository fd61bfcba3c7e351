#pragma once

#include "rainrisk/series.hpp"

#include <vector>

namespace rainrisk {

/// The four annualized rainfall-risk regressors.
enum class RiskVariant { rv1, rv2, rv3, rv4 };

const char* to_string(RiskVariant v);
RiskVariant risk_variant_from_string(const std::string& name);

/**
 * Within-year log-ratios of consecutive monthly rainfall values,
 * log(R_{t,m} / R_{t,m-1}), with every depth floored at floor_mm before the
 * ratio is taken. January pairs with December of the previous year; the
 * first panel year has no carryover and yields 11 ratios instead of 12.
 */
struct LogDiffYear {
    int year = 0;
    std::vector<double> diffs;
};

struct RiskOptions {
    double floor_mm = 0.1;  // lower bound applied before log-ratios
    bool rv4_sqrt = false;  // report the square root of rv4 instead
};

LogDiffYear log_diffs(const MonthlyRainfallSeries& rainfall, int year_index, double floor_mm);

/// sqrt of the annual sum of squared monthly depths. Raw values, no floor.
double rv1(const MonthlyRainfallSeries& rainfall, int year_index);

/// Population standard deviation (divisor 12) of the monthly depths.
double rv2(const MonthlyRainfallSeries& rainfall, int year_index);

/// sqrt of the sum of squared within-year log-ratios.
double rv3(const MonthlyRainfallSeries& rainfall, int year_index, double floor_mm);

/// Mean squared deviation of the within-year log-ratios around their mean,
/// divisor 12 regardless of how many ratios the year has. No outer root.
double rv4(const MonthlyRainfallSeries& rainfall, int year_index, double floor_mm);

/// One regressor value per panel year, year-indexed to match the panel.
AnnualSeries build_regressor(const MonthlyRainfallSeries& rainfall, RiskVariant variant,
                             const RiskOptions& options = {});

}  // namespace rainrisk
