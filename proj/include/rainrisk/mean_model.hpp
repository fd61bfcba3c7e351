#pragma once

#include "rainrisk/series.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace rainrisk {

/// Exogenous regressors, one row per observation; empty means none.
using ExogRows = std::vector<std::vector<double>>;

struct MeanSpec {
    int p = 0;                    // AR order
    int d = 0;                    // differencing order of the series supplied
    int q = 0;                    // MA order
    bool include_constant = true;
    int exog_count = 0;

    int param_count() const { return p + q + exog_count + (include_constant ? 1 : 0); }
};

struct MeanParams {
    double constant = 0.0;
    std::vector<double> ar;    // length p
    std::vector<double> ma;    // length q
    std::vector<double> exog;  // length exog_count
};

/// One objective evaluation of one optimizer start, for trace dumps.
struct OptTracePoint {
    int start = 0;
    int eval = 0;
    double f = 0.0;
};

/**
 * A fitted mean equation, together with the training context needed to
 * produce forecasts on both the differenced and the original level scale.
 */
struct MeanFit {
    MeanSpec spec;
    MeanParams params;
    double sigma2 = 0.0;
    double loglik = 0.0;
    double aic_raw = 0.0;
    double aic_per_obs = 0.0;
    std::vector<double> residuals;
    bool converged = false;
    std::string message;
    std::vector<OptTracePoint> opt_trace;  // filled when FitOptions::record_trace

    // training context
    std::vector<double> y;            // differenced-scale observations
    ExogRows exog;                    // raw exogenous rows
    std::vector<double> tail_levels;  // last d levels of the training span
};

struct MeanForecast {
    std::vector<double> differenced;  // h values on the modelled scale
    std::vector<double> levels;       // same forecasts integrated back
};

/// Options steering the CSS optimisation; shared with the GARCH fits.
struct FitOptions {
    int max_evals = 20000;
    double tol_x = 1e-9;
    double tol_f = 1e-12;
    std::uint64_t seed = 0;
    bool record_trace = false;
};

namespace transforms {

/// Partial autocorrelations in (-1,1)^p to AR coefficients of a stationary
/// polynomial (Durbin-Levinson recursion).
std::vector<double> pacf_to_coeffs(const std::vector<double>& pacf);

/// Inverse of pacf_to_coeffs; throws FitError when the coefficients lie
/// outside the stationary region.
std::vector<double> coeffs_to_pacf(const std::vector<double>& coeffs);

/// Unconstrained reals to a stationary coefficient vector (tanh, then the
/// recursion above) and back.
std::vector<double> unconstrained_to_coeffs(const std::vector<double>& raw);
std::vector<double> coeffs_to_unconstrained(const std::vector<double>& coeffs);

}  // namespace transforms

/// True when 1 - sum phi_i z^i has all roots strictly outside the unit circle.
bool is_stationary(const std::vector<double>& ar);
/// True when 1 + sum theta_j z^j has all roots strictly outside the unit circle.
bool is_invertible(const std::vector<double>& ma);

namespace detail {

/// CSS residual recursion without validation; returns false when a
/// non-finite value appears. Shared with the GARCH likelihood.
bool css_residuals(const MeanSpec& spec, const MeanParams& params, const std::vector<double>& y,
                   const ExogRows& exog, std::vector<double>& eps);

/// Mean-parameter packing for the unconstrained optimisation vector:
/// [constant?] [ar pacf raw] [ma pacf raw] [gamma]. unpack_mean advances
/// `pos` past the block it consumed.
MeanParams unpack_mean(const MeanSpec& spec, const std::vector<double>& x, std::size_t& pos);
void pack_mean(const MeanSpec& spec, const MeanParams& params, std::vector<double>& out);

struct Standardization {
    std::vector<double> center;
    std::vector<double> scale;
};

/// In-place column standardization; centering is skipped when the model has
/// no constant term to absorb it.
Standardization standardize(ExogRows& exog, int exog_count, bool allow_centering);

/// Level the presample observations are pinned to: the model-implied
/// unconditional mean (c + gamma' mean(x)) / (1 - sum phi). Invariant under
/// the internal standardization, which keeps optimized and reported
/// likelihoods identical.
double presample_level(const MeanSpec& spec, const MeanParams& params, const ExogRows& exog);

}  // namespace detail

/**
 * Conditional-sum-of-squares residual recursion:
 *   eps_t = y_t - c - sum_i phi_i y_{t-i} - sum_j theta_j eps_{t-j} - sum_k gamma_k x_{t,k}
 * with presample eps = 0 and presample y set to the implied unconditional
 * level c / (1 - sum phi).
 */
std::vector<double> arma_residuals(const MeanSpec& spec, const MeanParams& params,
                                   const std::vector<double>& y, const ExogRows& exog);

/// Gaussian log-likelihood of the CSS residuals at constant variance sigma2.
double css_loglik(const MeanSpec& spec, const MeanParams& params, const std::vector<double>& y,
                  const ExogRows& exog, double sigma2);

/**
 * Maximum (conditional) likelihood fit of the mean equation. Exogenous
 * columns are standardized internally for conditioning and the coefficients
 * mapped back to the raw scale.
 */
MeanFit fit_mean(const MeanSpec& spec, const DifferencedSeries& y, const ExogRows& exog,
                 const FitOptions& options = {});

/**
 * Iterated point forecasts with unknown future shocks set to zero;
 * future_exog must supply h rows when the model has regressors.
 */
MeanForecast forecast_mean(const MeanFit& fit, int h, const ExogRows& future_exog = {});

/// AIC grid search over p, q in [0, max_order] at fixed d; ties go to the
/// smaller (p, q) in lexicographic order.
MeanSpec select_order(const DifferencedSeries& y, const ExogRows& exog, bool include_constant,
                      int exog_count, int max_order = 2, const FitOptions& options = {});

}  // namespace rainrisk
