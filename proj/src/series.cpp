#include "rainrisk/series.hpp"

#include "rainrisk/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

namespace rainrisk {

namespace {

// tower[j] = j-th order backward difference evaluated at the newest of the
// given levels, j = 0..levels.size()-1.
std::vector<double> difference_tower(const std::vector<double>& levels) {
    std::vector<double> row = levels;
    std::vector<double> tower;
    tower.reserve(levels.size());
    while (!row.empty()) {
        tower.push_back(row.back());
        for (std::size_t i = 0; i + 1 < row.size(); ++i) {
            row[i] = row[i + 1] - row[i];
        }
        row.pop_back();
    }
    return tower;
}

}  // namespace

AnnualSeries::AnnualSeries(int start_year_, std::vector<double> values_, std::string unit_label_)
    : start_year(start_year_), values(std::move(values_)), unit_label(std::move(unit_label_)) {
    if (values.empty()) {
        throw ValidationError("AnnualSeries must contain at least one value");
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) {
            throw ValidationError("AnnualSeries has a non-finite value in year " +
                                  std::to_string(start_year + static_cast<int>(i)));
        }
    }
}

double AnnualSeries::value_at_year(int year) const {
    if (!covers_year(year)) {
        throw ValidationError("year " + std::to_string(year) + " outside series range " +
                              std::to_string(start_year) + "-" + std::to_string(last_year()));
    }
    return values[static_cast<std::size_t>(year - start_year)];
}

MonthlyRainfallSeries::MonthlyRainfallSeries(int start_year_, std::vector<std::array<double, 12>> rows_)
    : start_year(start_year_), rows(std::move(rows_)) {
    if (rows.empty()) {
        throw ValidationError("MonthlyRainfallSeries must contain at least one year");
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (int m = 0; m < 12; ++m) {
            const double r = rows[i][static_cast<std::size_t>(m)];
            if (!std::isfinite(r) || r < 0.0) {
                throw ValidationError("rainfall for year " +
                                      std::to_string(start_year + static_cast<int>(i)) +
                                      " month " + std::to_string(m + 1) +
                                      " must be finite and non-negative");
            }
        }
    }
}

AnnualSeries DifferencedSeries::as_annual() const {
    return AnnualSeries(start_year(), values, unit_label);
}

std::vector<double> DifferencedSeries::reconstruct_base() const {
    if (order == 0) {
        return values;
    }
    // Walk backwards from the trailing levels, removing one difference at a
    // time: tower[j] holds the j-th order backward difference at the current
    // position; the stored d-th differences drive the top entry.
    std::vector<double> tower = difference_tower(tail_levels);
    std::vector<double> levels_reversed;
    levels_reversed.reserve(values.size() + tail_levels.size());
    int t = order + static_cast<int>(values.size()) - 1;  // current base position
    levels_reversed.push_back(tower[0]);
    while (t > 0) {
        const int next = t - 1;
        std::vector<double> prev(tower.size());
        const int top = std::min<int>(static_cast<int>(tower.size()) - 1, next);
        for (int j = 0; j <= top; ++j) {
            const double higher = (j + 1 < static_cast<int>(tower.size()))
                                      ? tower[static_cast<std::size_t>(j + 1)]
                                      : values[static_cast<std::size_t>(t - order)];
            prev[static_cast<std::size_t>(j)] = tower[static_cast<std::size_t>(j)] - higher;
        }
        tower = std::move(prev);
        t = next;
        levels_reversed.push_back(tower[0]);
    }
    std::reverse(levels_reversed.begin(), levels_reversed.end());
    return levels_reversed;
}

DifferencedSeries difference(const AnnualSeries& series, int order) {
    if (order < 0) {
        throw ValidationError("differencing order must be non-negative");
    }
    if (order >= series.size()) {
        throw ValidationError("differencing order " + std::to_string(order) +
                              " must be smaller than series length " +
                              std::to_string(series.size()));
    }
    std::vector<double> vals = series.values;
    for (int k = 0; k < order; ++k) {
        for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
            vals[i] = vals[i + 1] - vals[i];
        }
        vals.pop_back();
    }
    DifferencedSeries out;
    out.base_start_year = series.start_year;
    out.order = order;
    out.values = std::move(vals);
    out.tail_levels.assign(series.values.end() - order, series.values.end());
    out.unit_label = series.unit_label;
    return out;
}

std::vector<double> integrate(const std::vector<double>& diffs,
                              const std::vector<double>& last_levels,
                              int order) {
    if (order < 0) {
        throw ValidationError("integration order must be non-negative");
    }
    if (static_cast<int>(last_levels.size()) != order) {
        throw ValidationError("integrate needs exactly " + std::to_string(order) +
                              " preceding levels, got " + std::to_string(last_levels.size()));
    }
    if (order == 0 || diffs.empty()) {
        return diffs;
    }
    std::vector<double> tower = difference_tower(last_levels);
    std::vector<double> levels;
    levels.reserve(diffs.size());
    for (double d : diffs) {
        double carry = d;
        for (int j = order - 1; j >= 0; --j) {
            tower[static_cast<std::size_t>(j)] += carry;
            carry = tower[static_cast<std::size_t>(j)];
        }
        levels.push_back(tower[0]);
    }
    return levels;
}

AlignedPair align(const AnnualSeries& production, const AnnualSeries& regressor, int lag) {
    if (lag != 0 && lag != 1) {
        throw ValidationError("alignment lag must be 0 or 1");
    }
    const int first = std::max(production.start_year, regressor.start_year + lag);
    const int last = std::min(production.last_year(), regressor.last_year() + lag);
    if (first > last) {
        throw ValidationError("production years " + std::to_string(production.start_year) + "-" +
                              std::to_string(production.last_year()) + " and regressor years " +
                              std::to_string(regressor.start_year) + "-" +
                              std::to_string(regressor.last_year()) +
                              " have no overlap at lag " + std::to_string(lag));
    }
    std::vector<double> prod_vals;
    std::vector<double> reg_vals;
    prod_vals.reserve(static_cast<std::size_t>(last - first + 1));
    reg_vals.reserve(static_cast<std::size_t>(last - first + 1));
    for (int year = first; year <= last; ++year) {
        prod_vals.push_back(production.value_at_year(year));
        reg_vals.push_back(regressor.value_at_year(year - lag));
    }
    AlignedPair out;
    out.production = AnnualSeries(first, std::move(prod_vals), production.unit_label);
    out.regressor = AnnualSeries(first, std::move(reg_vals), regressor.unit_label);
    out.lag = lag;
    return out;
}

}  // namespace rainrisk
