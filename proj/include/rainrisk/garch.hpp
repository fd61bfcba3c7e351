#pragma once

#include "rainrisk/mean_model.hpp"
#include "rainrisk/series.hpp"

#include <string>
#include <vector>

namespace rainrisk {

enum class GarchFamily { sgarch, egarch, gjrgarch, igarch };

const char* to_string(GarchFamily f);
GarchFamily garch_family_from_string(const std::string& name);

struct VarianceSpec {
    GarchFamily family = GarchFamily::sgarch;
    int r = 1;  // ARCH order
    int s = 1;  // GARCH order
};

/**
 * Conditional-variance parameters. gamma_asym holds the r asymmetry
 * coefficients of the eGARCH and gjrGARCH recursions and stays empty for
 * the symmetric families. For iGARCH the coefficients always satisfy
 * sum(alpha) + sum(beta) = 1, with the last beta derived rather than free.
 */
struct VarianceParams {
    double omega = 0.0;
    std::vector<double> alpha;
    std::vector<double> beta;
    std::vector<double> gamma_asym;
};

/// Number of free parameters behind a variance specification.
int variance_param_count(const VarianceSpec& spec);

/// True when the parameters satisfy the family's admissibility constraints.
bool variance_params_admissible(const VarianceSpec& spec, const VarianceParams& params);

struct GarchFit {
    MeanSpec mean_spec;
    MeanParams mean_params;
    VarianceSpec var_spec;
    VarianceParams var_params;
    double loglik = 0.0;
    double aic_raw = 0.0;
    double aic_per_obs = 0.0;
    double init_sigma2 = 0.0;  // recursion warm start, recorded for reproducibility
    std::vector<double> residuals;
    std::vector<double> sigma2_path;
    std::vector<double> std_residuals;
    bool converged = false;
    bool near_boundary = false;  // persistence above 0.999
    std::string message;
    std::vector<OptTracePoint> opt_trace;

    // training context for forecasting
    std::vector<double> y;
    ExogRows exog;
    std::vector<double> tail_levels;
};

struct GarchForecast {
    std::vector<double> mean_differenced;
    std::vector<double> mean_levels;
    std::vector<double> variance;
};

/**
 * Conditional-variance recursion for the four families. Presample squared
 * residuals and variances are set to init_sigma2; presample standardized
 * shocks are 0 (their absolute value E|z|) for the log-variance family, and
 * presample negative-shock indicators take their expected value 1/2.
 * Throws FitError naming the first index at which the path stops being
 * finite and positive.
 */
std::vector<double> variance_recursion(const VarianceSpec& spec, const VarianceParams& params,
                                       const std::vector<double>& residuals, double init_sigma2);

/**
 * Joint Gaussian log-likelihood of the mean equation with time-varying
 * conditional variance. Inadmissible parameter values yield a large
 * negative penalty value instead of an exception.
 */
double garch_loglik(const MeanSpec& mean_spec, const VarianceSpec& var_spec,
                    const MeanParams& mean_params, const VarianceParams& var_params,
                    const std::vector<double>& y, const ExogRows& exog, double init_sigma2);

/**
 * Joint maximum-likelihood fit of mean and variance parameters. The
 * recursion warm start is the residual variance of a preliminary
 * constant-variance fit of the same mean equation.
 */
GarchFit fit_garch(const MeanSpec& mean_spec, const VarianceSpec& var_spec,
                   const DifferencedSeries& y, const ExogRows& exog,
                   const FitOptions& options = {});

/**
 * Point forecasts (identical to the plain mean-equation forecasts) plus
 * variance forecasts with future squared shocks replaced by their
 * conditional expectation.
 */
GarchForecast forecast_garch(const GarchFit& fit, int h, const ExogRows& future_exog = {});

}  // namespace rainrisk
