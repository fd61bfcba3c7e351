#pragma once

#include <vector>

namespace rainrisk {

/// Deterministic-term choice for the unit-root regression.
enum class AdfRegression { constant, constant_trend };

struct AdfResult {
    double statistic = 0.0;  // t-ratio of the lagged-level coefficient
    double p_value = 1.0;    // interpolated, clamped to [0.01, 0.99]
    bool p_clamped = false;  // true when the statistic fell outside the table
    int lags_used = 0;
    AdfRegression regression = AdfRegression::constant;
    int n_effective = 0;     // rows in the test regression
};

struct LeastSquaresFit {
    std::vector<double> coefficients;
    std::vector<double> standard_errors;
    std::vector<double> residuals;
    double sigma2 = 0.0;  // unbiased residual-variance estimate
    int dof = 0;
};

/**
 * Ordinary least squares via Householder QR. `design` is row-major with
 * `cols` entries per row. Requires rows >= cols and full column rank;
 * throws FitError on rank deficiency.
 */
LeastSquaresFit least_squares(const std::vector<double>& design, int rows, int cols,
                              const std::vector<double>& response);

/**
 * Augmented Dickey-Fuller unit-root test.
 *
 * Fits dy_t = a (+ b t) + rho y_{t-1} + sum_i delta_i dy_{t-i} + e_t and
 * reports the t-ratio of rho with a p-value interpolated from embedded
 * Dickey-Fuller percentile tables. max_lag < 0 selects the default
 * floor((n-1)^(1/3)) augmentation order.
 */
AdfResult adf_test(const std::vector<double>& series, int max_lag = -1,
                   AdfRegression regression = AdfRegression::constant);

}  // namespace rainrisk
