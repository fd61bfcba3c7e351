#include "rainrisk/risk.hpp"

#include "rainrisk/errors.hpp"

#include <cmath>
#include <string>

namespace rainrisk {

namespace {

void check_year_index(const MonthlyRainfallSeries& rainfall, int year_index) {
    if (year_index < 0 || year_index >= rainfall.size()) {
        throw ValidationError("year index " + std::to_string(year_index) +
                              " outside panel of " + std::to_string(rainfall.size()) + " years");
    }
}

void check_floor(double floor_mm) {
    if (!(floor_mm > 0.0)) {
        throw ValidationError("floor_mm must be positive");
    }
}

}  // namespace

const char* to_string(RiskVariant v) {
    switch (v) {
        case RiskVariant::rv1: return "rv1";
        case RiskVariant::rv2: return "rv2";
        case RiskVariant::rv3: return "rv3";
        case RiskVariant::rv4: return "rv4";
    }
    return "rv?";
}

RiskVariant risk_variant_from_string(const std::string& name) {
    if (name == "rv1" || name == "RV1") return RiskVariant::rv1;
    if (name == "rv2" || name == "RV2") return RiskVariant::rv2;
    if (name == "rv3" || name == "RV3") return RiskVariant::rv3;
    if (name == "rv4" || name == "RV4") return RiskVariant::rv4;
    throw ValidationError("unknown risk variant '" + name + "' (expected rv1..rv4)");
}

LogDiffYear log_diffs(const MonthlyRainfallSeries& rainfall, int year_index, double floor_mm) {
    check_year_index(rainfall, year_index);
    check_floor(floor_mm);
    const auto& row = rainfall.rows[static_cast<std::size_t>(year_index)];
    LogDiffYear out;
    out.year = rainfall.start_year + year_index;
    out.diffs.reserve(12);
    double prev;
    int first_month = 0;
    if (year_index > 0) {
        prev = std::max(rainfall.rows[static_cast<std::size_t>(year_index - 1)][11], floor_mm);
    } else {
        prev = std::max(row[0], floor_mm);
        first_month = 1;  // no December carryover: 11 ratios for the first year
    }
    for (int m = first_month; m < 12; ++m) {
        const double cur = std::max(row[static_cast<std::size_t>(m)], floor_mm);
        out.diffs.push_back(std::log(cur / prev));
        prev = cur;
    }
    return out;
}

double rv1(const MonthlyRainfallSeries& rainfall, int year_index) {
    check_year_index(rainfall, year_index);
    const auto& row = rainfall.rows[static_cast<std::size_t>(year_index)];
    double sum_sq = 0.0;
    for (double r : row) {
        sum_sq += r * r;
    }
    return std::sqrt(sum_sq);
}

double rv2(const MonthlyRainfallSeries& rainfall, int year_index) {
    check_year_index(rainfall, year_index);
    const auto& row = rainfall.rows[static_cast<std::size_t>(year_index)];
    double mean = 0.0;
    for (double r : row) {
        mean += r;
    }
    mean /= 12.0;
    double sum_sq = 0.0;
    for (double r : row) {
        sum_sq += (r - mean) * (r - mean);
    }
    return std::sqrt(sum_sq / 12.0);
}

double rv3(const MonthlyRainfallSeries& rainfall, int year_index, double floor_mm) {
    const LogDiffYear ld = log_diffs(rainfall, year_index, floor_mm);
    double sum_sq = 0.0;
    for (double d : ld.diffs) {
        sum_sq += d * d;
    }
    return std::sqrt(sum_sq);
}

double rv4(const MonthlyRainfallSeries& rainfall, int year_index, double floor_mm) {
    const LogDiffYear ld = log_diffs(rainfall, year_index, floor_mm);
    double mean = 0.0;
    for (double d : ld.diffs) {
        mean += d;
    }
    mean /= static_cast<double>(ld.diffs.size());
    double sum_sq = 0.0;
    for (double d : ld.diffs) {
        sum_sq += (d - mean) * (d - mean);
    }
    return sum_sq / 12.0;
}

AnnualSeries build_regressor(const MonthlyRainfallSeries& rainfall, RiskVariant variant,
                             const RiskOptions& options) {
    std::vector<double> values(static_cast<std::size_t>(rainfall.size()));
    for (int i = 0; i < rainfall.size(); ++i) {
        double v = 0.0;
        switch (variant) {
            case RiskVariant::rv1: v = rv1(rainfall, i); break;
            case RiskVariant::rv2: v = rv2(rainfall, i); break;
            case RiskVariant::rv3: v = rv3(rainfall, i, options.floor_mm); break;
            case RiskVariant::rv4:
                v = rv4(rainfall, i, options.floor_mm);
                if (options.rv4_sqrt) {
                    v = std::sqrt(v);
                }
                break;
        }
        values[static_cast<std::size_t>(i)] = v;
    }
    const char* unit = (variant == RiskVariant::rv1 || variant == RiskVariant::rv2) ? "mm" : "";
    return AnnualSeries(rainfall.start_year, std::move(values), unit);
}

}  // namespace rainrisk
