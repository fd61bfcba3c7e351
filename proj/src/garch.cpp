#include "rainrisk/garch.hpp"

#include "rainrisk/errors.hpp"
#include "rainrisk/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

namespace rainrisk {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;
constexpr double kAbsZMean = 0.7978845608028654;  // E|z| for standard normal z

double sigmoid(double x) {
    if (x >= 0.0) {
        const double e = std::exp(-x);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double logit(double p) {
    const double q = std::clamp(p, 1e-12, 1.0 - 1e-12);
    return std::log(q / (1.0 - q));
}

void check_var_spec(const VarianceSpec& spec) {
    if (spec.r < 1) {
        throw ValidationError("ARCH order r must be at least 1");
    }
    if (spec.s < 0) {
        throw ValidationError("GARCH order s must be non-negative");
    }
    if (spec.family == GarchFamily::igarch && spec.s < 1) {
        throw ValidationError("iGARCH needs s >= 1 to derive the last beta");
    }
}

void check_var_params(const VarianceSpec& spec, const VarianceParams& params) {
    const bool asym = spec.family == GarchFamily::egarch || spec.family == GarchFamily::gjrgarch;
    if (static_cast<int>(params.alpha.size()) != spec.r ||
        static_cast<int>(params.beta.size()) != spec.s ||
        static_cast<int>(params.gamma_asym.size()) != (asym ? spec.r : 0)) {
        throw ValidationError("variance parameter lengths disagree with the spec");
    }
}

double sum(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) {
        s += x;
    }
    return s;
}

// Stick-breaking map between R^k and the open simplex {c_i > 0, sum c < 1}.
std::vector<double> sticks_to_simplex(const double* raw, int k) {
    std::vector<double> out(static_cast<std::size_t>(k));
    double remaining = 1.0;
    for (int i = 0; i < k; ++i) {
        out[static_cast<std::size_t>(i)] = sigmoid(raw[i]) * remaining;
        remaining -= out[static_cast<std::size_t>(i)];
    }
    return out;
}

void simplex_to_sticks(const std::vector<double>& c, std::vector<double>& out) {
    double remaining = 1.0;
    for (double v : c) {
        out.push_back(logit(remaining > 0.0 ? v / remaining : 0.0));
        remaining -= v;
    }
}

}  // namespace

const char* to_string(GarchFamily f) {
    switch (f) {
        case GarchFamily::sgarch: return "sGARCH";
        case GarchFamily::egarch: return "eGARCH";
        case GarchFamily::gjrgarch: return "gjrGARCH";
        case GarchFamily::igarch: return "iGARCH";
    }
    return "GARCH?";
}

GarchFamily garch_family_from_string(const std::string& name) {
    if (name == "sGARCH" || name == "sgarch") return GarchFamily::sgarch;
    if (name == "eGARCH" || name == "egarch") return GarchFamily::egarch;
    if (name == "gjrGARCH" || name == "gjrgarch") return GarchFamily::gjrgarch;
    if (name == "iGARCH" || name == "igarch") return GarchFamily::igarch;
    throw ValidationError("unknown GARCH family '" + name +
                          "' (expected sGARCH, eGARCH, gjrGARCH or iGARCH)");
}

int variance_param_count(const VarianceSpec& spec) {
    switch (spec.family) {
        case GarchFamily::sgarch: return 1 + spec.r + spec.s;
        case GarchFamily::egarch: return 1 + 2 * spec.r + spec.s;
        case GarchFamily::gjrgarch: return 1 + 2 * spec.r + spec.s;
        case GarchFamily::igarch: return spec.r + spec.s;  // omega + r + s - 1
    }
    return 0;
}

bool variance_params_admissible(const VarianceSpec& spec, const VarianceParams& params) {
    switch (spec.family) {
        case GarchFamily::sgarch: {
            if (!(params.omega > 0.0)) return false;
            for (double a : params.alpha) {
                if (a < 0.0) return false;
            }
            for (double b : params.beta) {
                if (b < 0.0) return false;
            }
            return sum(params.alpha) + sum(params.beta) < 1.0;
        }
        case GarchFamily::gjrgarch: {
            if (!(params.omega > 0.0)) return false;
            for (double a : params.alpha) {
                if (a < 0.0) return false;
            }
            for (double b : params.beta) {
                if (b < 0.0) return false;
            }
            for (int i = 0; i < spec.r; ++i) {
                if (params.alpha[static_cast<std::size_t>(i)] +
                        params.gamma_asym[static_cast<std::size_t>(i)] < 0.0) {
                    return false;
                }
            }
            return sum(params.alpha) + sum(params.beta) + 0.5 * sum(params.gamma_asym) < 1.0;
        }
        case GarchFamily::igarch: {
            if (!(params.omega > 0.0)) return false;
            for (double a : params.alpha) {
                if (a < 0.0) return false;
            }
            for (double b : params.beta) {
                if (b < 0.0) return false;
            }
            return std::abs(sum(params.alpha) + sum(params.beta) - 1.0) < 1e-10;
        }
        case GarchFamily::egarch: {
            double abs_beta = 0.0;
            for (double b : params.beta) {
                abs_beta += std::abs(b);
            }
            return abs_beta < 1.0;
        }
    }
    return false;
}

std::vector<double> variance_recursion(const VarianceSpec& spec, const VarianceParams& params,
                                       const std::vector<double>& residuals, double init_sigma2) {
    check_var_spec(spec);
    check_var_params(spec, params);
    if (residuals.empty()) {
        throw ValidationError("variance_recursion needs a non-empty residual sequence");
    }
    if (!(init_sigma2 > 0.0)) {
        throw ValidationError("init_sigma2 must be positive");
    }

    const int n = static_cast<int>(residuals.size());
    std::vector<double> sigma2(residuals.size());
    const double log_init = std::log(init_sigma2);

    for (int t = 0; t < n; ++t) {
        double s2;
        if (spec.family == GarchFamily::egarch) {
            double log_s2 = params.omega;
            for (int i = 1; i <= spec.r; ++i) {
                const int idx = t - i;
                if (idx >= 0) {
                    const double z = residuals[static_cast<std::size_t>(idx)] /
                                     std::sqrt(sigma2[static_cast<std::size_t>(idx)]);
                    log_s2 += params.alpha[static_cast<std::size_t>(i - 1)] * z +
                              params.gamma_asym[static_cast<std::size_t>(i - 1)] *
                                  (std::abs(z) - kAbsZMean);
                }
                // presample: z = 0 and |z| = E|z|, so both terms vanish
            }
            for (int j = 1; j <= spec.s; ++j) {
                const int idx = t - j;
                const double log_prev =
                    (idx >= 0) ? std::log(sigma2[static_cast<std::size_t>(idx)]) : log_init;
                log_s2 += params.beta[static_cast<std::size_t>(j - 1)] * log_prev;
            }
            s2 = std::exp(log_s2);
        } else {
            s2 = params.omega;
            for (int i = 1; i <= spec.r; ++i) {
                const int idx = t - i;
                const double eps2 = (idx >= 0)
                                        ? residuals[static_cast<std::size_t>(idx)] *
                                              residuals[static_cast<std::size_t>(idx)]
                                        : init_sigma2;
                s2 += params.alpha[static_cast<std::size_t>(i - 1)] * eps2;
                if (spec.family == GarchFamily::gjrgarch) {
                    const double indicator =
                        (idx >= 0) ? (residuals[static_cast<std::size_t>(idx)] < 0.0 ? 1.0 : 0.0)
                                   : 0.5;
                    s2 += params.gamma_asym[static_cast<std::size_t>(i - 1)] * indicator * eps2;
                }
            }
            for (int j = 1; j <= spec.s; ++j) {
                const int idx = t - j;
                const double prev =
                    (idx >= 0) ? sigma2[static_cast<std::size_t>(idx)] : init_sigma2;
                s2 += params.beta[static_cast<std::size_t>(j - 1)] * prev;
            }
        }
        if (!std::isfinite(s2) || !(s2 > 0.0)) {
            throw FitError("variance_recursion: non-positive or non-finite variance at index " +
                           std::to_string(t));
        }
        sigma2[static_cast<std::size_t>(t)] = s2;
    }
    return sigma2;
}

double garch_loglik(const MeanSpec& mean_spec, const VarianceSpec& var_spec,
                    const MeanParams& mean_params, const VarianceParams& var_params,
                    const std::vector<double>& y, const ExogRows& exog, double init_sigma2) {
    check_var_spec(var_spec);
    check_var_params(var_spec, var_params);
    if (!(init_sigma2 > 0.0)) {
        throw ValidationError("init_sigma2 must be positive");
    }
    if (!variance_params_admissible(var_spec, var_params)) {
        return -kPenalty;
    }
    std::vector<double> eps;
    if (!detail::css_residuals(mean_spec, mean_params, y, exog, eps)) {
        return -kPenalty;
    }
    std::vector<double> sigma2;
    try {
        sigma2 = variance_recursion(var_spec, var_params, eps, init_sigma2);
    } catch (const FitError&) {
        return -kPenalty;
    }
    double ll = 0.0;
    for (std::size_t t = 0; t < eps.size(); ++t) {
        ll -= 0.5 * (kLog2Pi + std::log(sigma2[t]) + eps[t] * eps[t] / sigma2[t]);
    }
    if (!std::isfinite(ll)) {
        return -kPenalty;
    }
    return ll;
}

namespace {

// Unconstrained parameterizations of the admissible regions:
//   sGARCH  [log omega | sticks over (alpha, beta)]
//   gjr     [log omega | sticks over (alpha + gamma/2, beta) | split logits]
//   iGARCH  [log omega | sticks over (alpha, beta_1..beta_{s-1})], last beta derived
//   eGARCH  [omega | alpha | gamma | tanh sticks for beta]
VarianceParams unpack_variance(const VarianceSpec& spec, const std::vector<double>& x,
                               std::size_t& pos) {
    VarianceParams params;
    const int r = spec.r;
    const int s = spec.s;
    switch (spec.family) {
        case GarchFamily::sgarch: {
            params.omega = std::exp(x[pos++]);
            const std::vector<double> c = sticks_to_simplex(&x[pos], r + s);
            pos += static_cast<std::size_t>(r + s);
            params.alpha.assign(c.begin(), c.begin() + r);
            params.beta.assign(c.begin() + r, c.end());
            break;
        }
        case GarchFamily::gjrgarch: {
            params.omega = std::exp(x[pos++]);
            const std::vector<double> c = sticks_to_simplex(&x[pos], r + s);
            pos += static_cast<std::size_t>(r + s);
            params.beta.assign(c.begin() + r, c.end());
            params.alpha.resize(static_cast<std::size_t>(r));
            params.gamma_asym.resize(static_cast<std::size_t>(r));
            for (int i = 0; i < r; ++i) {
                const double a_eff = c[static_cast<std::size_t>(i)];  // alpha + gamma/2
                const double alpha = 2.0 * a_eff * sigmoid(x[pos++]);
                params.alpha[static_cast<std::size_t>(i)] = alpha;
                params.gamma_asym[static_cast<std::size_t>(i)] = 2.0 * (a_eff - alpha);
            }
            break;
        }
        case GarchFamily::igarch: {
            params.omega = std::exp(x[pos++]);
            const std::vector<double> c = sticks_to_simplex(&x[pos], r + s - 1);
            pos += static_cast<std::size_t>(r + s - 1);
            params.alpha.assign(c.begin(), c.begin() + r);
            params.beta.assign(c.begin() + r, c.end());
            params.beta.push_back(1.0 - sum(params.alpha) - sum(params.beta));
            break;
        }
        case GarchFamily::egarch: {
            params.omega = x[pos++];
            params.alpha.assign(x.begin() + static_cast<std::ptrdiff_t>(pos),
                                x.begin() + static_cast<std::ptrdiff_t>(pos + r));
            pos += static_cast<std::size_t>(r);
            params.gamma_asym.assign(x.begin() + static_cast<std::ptrdiff_t>(pos),
                                     x.begin() + static_cast<std::ptrdiff_t>(pos + r));
            pos += static_cast<std::size_t>(r);
            params.beta.resize(static_cast<std::size_t>(s));
            double budget = 1.0;
            for (int j = 0; j < s; ++j) {
                params.beta[static_cast<std::size_t>(j)] = std::tanh(x[pos++]) * budget;
                budget -= std::abs(params.beta[static_cast<std::size_t>(j)]);
            }
            break;
        }
    }
    return params;
}

void pack_variance(const VarianceSpec& spec, const VarianceParams& params,
                   std::vector<double>& out) {
    const int r = spec.r;
    const int s = spec.s;
    switch (spec.family) {
        case GarchFamily::sgarch: {
            out.push_back(std::log(std::max(params.omega, 1e-300)));
            std::vector<double> c = params.alpha;
            c.insert(c.end(), params.beta.begin(), params.beta.end());
            simplex_to_sticks(c, out);
            break;
        }
        case GarchFamily::gjrgarch: {
            out.push_back(std::log(std::max(params.omega, 1e-300)));
            std::vector<double> c(static_cast<std::size_t>(r));
            for (int i = 0; i < r; ++i) {
                c[static_cast<std::size_t>(i)] = params.alpha[static_cast<std::size_t>(i)] +
                                                 0.5 * params.gamma_asym[static_cast<std::size_t>(i)];
            }
            c.insert(c.end(), params.beta.begin(), params.beta.end());
            simplex_to_sticks(c, out);
            for (int i = 0; i < r; ++i) {
                const double a_eff = params.alpha[static_cast<std::size_t>(i)] +
                                     0.5 * params.gamma_asym[static_cast<std::size_t>(i)];
                const double ratio =
                    (a_eff > 0.0) ? params.alpha[static_cast<std::size_t>(i)] / (2.0 * a_eff) : 0.5;
                out.push_back(logit(ratio));
            }
            break;
        }
        case GarchFamily::igarch: {
            out.push_back(std::log(std::max(params.omega, 1e-300)));
            std::vector<double> c = params.alpha;
            c.insert(c.end(), params.beta.begin(), params.beta.end() - 1);
            simplex_to_sticks(c, out);
            break;
        }
        case GarchFamily::egarch: {
            out.push_back(params.omega);
            out.insert(out.end(), params.alpha.begin(), params.alpha.end());
            out.insert(out.end(), params.gamma_asym.begin(), params.gamma_asym.end());
            double budget = 1.0;
            for (int j = 0; j < s; ++j) {
                const double b = params.beta[static_cast<std::size_t>(j)];
                const double ratio = (budget > 0.0) ? std::clamp(b / budget, -0.999999, 0.999999) : 0.0;
                out.push_back(std::atanh(ratio));
                budget -= std::abs(b);
            }
            break;
        }
    }
}

// The canonical variance warm start around persistence 0.85.
VarianceParams variance_warm_start(const VarianceSpec& spec, double resid_var) {
    VarianceParams params;
    const double v = std::max(resid_var, 1e-12);
    const int r = spec.r;
    const int s = spec.s;
    params.alpha.assign(static_cast<std::size_t>(r), 0.0);
    params.beta.assign(static_cast<std::size_t>(s), 0.0);
    params.alpha[0] = 0.05;
    for (int i = 1; i < r; ++i) {
        params.alpha[static_cast<std::size_t>(i)] = 0.01;
    }
    if (s > 0) {
        params.beta[0] = 0.80;
        for (int j = 1; j < s; ++j) {
            params.beta[static_cast<std::size_t>(j)] = 0.02;
        }
    }
    switch (spec.family) {
        case GarchFamily::sgarch:
            params.omega = (1.0 - 0.85) * v;
            break;
        case GarchFamily::gjrgarch:
            params.gamma_asym.assign(static_cast<std::size_t>(r), 0.0);
            params.omega = (1.0 - 0.85) * v;
            break;
        case GarchFamily::igarch: {
            params.omega = 0.05 * v;
            double used = sum(params.alpha);
            for (int j = 0; j + 1 < s; ++j) {
                used += params.beta[static_cast<std::size_t>(j)];
            }
            params.beta[static_cast<std::size_t>(s - 1)] = 1.0 - used;
            break;
        }
        case GarchFamily::egarch:
            params.gamma_asym.assign(static_cast<std::size_t>(r), 0.1);
            params.alpha.assign(static_cast<std::size_t>(r), 0.0);
            params.omega = std::log(v) * (1.0 - sum(params.beta));
            break;
    }
    return params;
}

// A start that reproduces (or closely tracks, for iGARCH) the constant
// variance of the preliminary CSS fit.
VarianceParams variance_flat_start(const VarianceSpec& spec, double resid_var) {
    VarianceParams params;
    const double v = std::max(resid_var, 1e-12);
    const int r = spec.r;
    const int s = spec.s;
    params.alpha.assign(static_cast<std::size_t>(r), 1e-4);
    params.beta.assign(static_cast<std::size_t>(s), 1e-4);
    switch (spec.family) {
        case GarchFamily::sgarch:
            params.omega = v * (1.0 - 1e-4 * (r + s));
            break;
        case GarchFamily::gjrgarch:
            params.gamma_asym.assign(static_cast<std::size_t>(r), 0.0);
            params.omega = v * (1.0 - 1e-4 * (r + s));
            break;
        case GarchFamily::igarch: {
            // constant variance is not nested; use a slow-moving path
            params.alpha.assign(static_cast<std::size_t>(r), 0.0);
            params.alpha[0] = 0.02;
            params.beta.assign(static_cast<std::size_t>(s), 0.0);
            params.beta[static_cast<std::size_t>(s - 1)] = 1.0 - sum(params.alpha);
            params.omega = 0.01 * v;
            break;
        }
        case GarchFamily::egarch:
            params.gamma_asym.assign(static_cast<std::size_t>(r), 0.0);
            params.alpha.assign(static_cast<std::size_t>(r), 0.0);
            params.beta.assign(static_cast<std::size_t>(s), 0.0);
            params.omega = std::log(v);
            break;
    }
    return params;
}

double persistence(const VarianceSpec& spec, const VarianceParams& params) {
    switch (spec.family) {
        case GarchFamily::sgarch:
        case GarchFamily::igarch:
            return sum(params.alpha) + sum(params.beta);
        case GarchFamily::gjrgarch:
            return sum(params.alpha) + sum(params.beta) + 0.5 * sum(params.gamma_asym);
        case GarchFamily::egarch: {
            double abs_beta = 0.0;
            for (double b : params.beta) {
                abs_beta += std::abs(b);
            }
            return abs_beta;
        }
    }
    return 0.0;
}

}  // namespace

GarchFit fit_garch(const MeanSpec& mean_spec, const VarianceSpec& var_spec,
                   const DifferencedSeries& y, const ExogRows& exog, const FitOptions& options) {
    check_var_spec(var_spec);

    // Preliminary constant-variance fit supplies the mean warm start and the
    // recursion initialisation.
    const MeanFit css = fit_mean(mean_spec, y, exog, options);
    const double init_sigma2 = std::max(css.sigma2, 1e-12);

    GarchFit fit;
    fit.mean_spec = mean_spec;
    fit.var_spec = var_spec;
    fit.init_sigma2 = init_sigma2;
    fit.y = y.values;
    fit.exog = exog;
    fit.tail_levels = y.tail_levels;
    const int n = y.size();
    if (n < 30) {
        fit.message = "training sample below 30 observations; GARCH estimates will be fragile";
    }

    ExogRows exog_std = exog;
    const detail::Standardization std_info =
        detail::standardize(exog_std, mean_spec.exog_count, mean_spec.include_constant);

    // Preliminary natural-scale mean params mapped into standardized space.
    MeanParams css_std = css.params;
    for (int k = 0; k < mean_spec.exog_count; ++k) {
        const double g_nat = css.params.exog[static_cast<std::size_t>(k)];
        css_std.exog[static_cast<std::size_t>(k)] = g_nat * std_info.scale[static_cast<std::size_t>(k)];
        css_std.constant += g_nat * std_info.center[static_cast<std::size_t>(k)];
    }

    auto objective = [&](const std::vector<double>& x) {
        std::size_t pos = 0;
        MeanParams mean_params;
        try {
            mean_params = detail::unpack_mean(mean_spec, x, pos);
        } catch (const FitError&) {
            return kPenalty;
        }
        const VarianceParams var_params = unpack_variance(var_spec, x, pos);
        const double ll = garch_loglik(mean_spec, var_spec, mean_params, var_params, y.values,
                                       exog_std, init_sigma2);
        return -ll;
    };

    std::vector<std::vector<double>> starts;
    {
        std::vector<double> warm;
        detail::pack_mean(mean_spec, css_std, warm);
        pack_variance(var_spec, variance_warm_start(var_spec, init_sigma2), warm);
        starts.push_back(warm);

        std::vector<double> flat;
        detail::pack_mean(mean_spec, css_std, flat);
        pack_variance(var_spec, variance_flat_start(var_spec, init_sigma2), flat);
        starts.push_back(flat);

        std::vector<double> jittered = warm;
        for (double& v : jittered) {
            v += 0.15;
        }
        starts.push_back(jittered);
    }

    OptResult best;
    best.f_best = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < starts.size(); ++s) {
        OptProblem problem;
        problem.objective = objective;
        problem.x0 = starts[s];
        problem.max_evals = options.max_evals;
        problem.tol_x = options.tol_x;
        problem.tol_f = options.tol_f;
        problem.seed = options.seed + s;
        problem.record_trace = options.record_trace;
        const OptResult r = minimize(problem);
        if (options.record_trace) {
            for (const auto& [idx, f] : r.trace) {
                fit.opt_trace.push_back({static_cast<int>(s), idx, f});
            }
        }
        if (r.f_best < best.f_best) {
            best = r;
        }
    }
    if (!(best.f_best < 0.5 * kPenalty)) {
        throw FitError("fit_garch: no admissible parameter point found");
    }

    std::size_t pos = 0;
    const MeanParams mean_std = detail::unpack_mean(mean_spec, best.x_best, pos);
    fit.var_params = unpack_variance(var_spec, best.x_best, pos);
    fit.mean_params = mean_std;
    for (int k = 0; k < mean_spec.exog_count; ++k) {
        const double g = mean_std.exog[static_cast<std::size_t>(k)];
        fit.mean_params.exog[static_cast<std::size_t>(k)] =
            g / std_info.scale[static_cast<std::size_t>(k)];
        fit.mean_params.constant -= g * std_info.center[static_cast<std::size_t>(k)] /
                                    std_info.scale[static_cast<std::size_t>(k)];
    }

    fit.residuals = arma_residuals(mean_spec, fit.mean_params, y.values, exog);
    fit.sigma2_path = variance_recursion(var_spec, fit.var_params, fit.residuals, init_sigma2);
    fit.std_residuals.resize(fit.residuals.size());
    fit.loglik = 0.0;
    for (std::size_t t = 0; t < fit.residuals.size(); ++t) {
        fit.std_residuals[t] = fit.residuals[t] / std::sqrt(fit.sigma2_path[t]);
        fit.loglik -= 0.5 * (kLog2Pi + std::log(fit.sigma2_path[t]) +
                             fit.residuals[t] * fit.residuals[t] / fit.sigma2_path[t]);
    }
    const int k_params = mean_spec.param_count() + variance_param_count(var_spec);
    fit.aic_raw = 2.0 * k_params - 2.0 * fit.loglik;
    fit.aic_per_obs = fit.aic_raw / static_cast<double>(n);
    fit.converged = best.converged;
    fit.near_boundary =
        var_spec.family != GarchFamily::igarch && persistence(var_spec, fit.var_params) > 0.999;
    return fit;
}

GarchForecast forecast_garch(const GarchFit& fit, int h, const ExogRows& future_exog) {
    // The mean equation forecasts exactly as the constant-variance model:
    // the variance never enters the point forecast.
    MeanFit mean_view;
    mean_view.spec = fit.mean_spec;
    mean_view.params = fit.mean_params;
    mean_view.residuals = fit.residuals;
    mean_view.y = fit.y;
    mean_view.exog = fit.exog;
    mean_view.tail_levels = fit.tail_levels;
    const MeanForecast mean_fc = forecast_mean(mean_view, h, future_exog);

    GarchForecast out;
    out.mean_differenced = mean_fc.differenced;
    out.mean_levels = mean_fc.levels;
    out.variance.reserve(static_cast<std::size_t>(h));

    const VarianceSpec& spec = fit.var_spec;
    const VarianceParams& params = fit.var_params;
    const int n = static_cast<int>(fit.residuals.size());
    const double log_init = std::log(fit.init_sigma2);

    auto past_or_forecast_var = [&](int idx) {
        if (idx < 0) return fit.init_sigma2;
        if (idx < n) return fit.sigma2_path[static_cast<std::size_t>(idx)];
        return out.variance[static_cast<std::size_t>(idx - n)];
    };

    for (int step = 1; step <= h; ++step) {
        const int t = n - 1 + step;
        double s2;
        if (spec.family == GarchFamily::egarch) {
            double log_s2 = params.omega;
            for (int i = 1; i <= spec.r; ++i) {
                const int idx = t - i;
                if (idx >= 0 && idx < n) {
                    const double z = fit.residuals[static_cast<std::size_t>(idx)] /
                                     std::sqrt(fit.sigma2_path[static_cast<std::size_t>(idx)]);
                    log_s2 += params.alpha[static_cast<std::size_t>(i - 1)] * z +
                              params.gamma_asym[static_cast<std::size_t>(i - 1)] *
                                  (std::abs(z) - kAbsZMean);
                }
                // future shock terms have zero conditional expectation
            }
            for (int j = 1; j <= spec.s; ++j) {
                const int idx = t - j;
                const double log_prev =
                    (idx < 0) ? log_init : std::log(past_or_forecast_var(idx));
                log_s2 += params.beta[static_cast<std::size_t>(j - 1)] * log_prev;
            }
            s2 = std::exp(log_s2);
        } else {
            s2 = params.omega;
            for (int i = 1; i <= spec.r; ++i) {
                const int idx = t - i;
                double eps2_expected;
                double asym = 0.0;
                if (idx >= 0 && idx < n) {
                    const double e = fit.residuals[static_cast<std::size_t>(idx)];
                    eps2_expected = e * e;
                    if (spec.family == GarchFamily::gjrgarch && e < 0.0) {
                        asym = params.gamma_asym[static_cast<std::size_t>(i - 1)] * eps2_expected;
                    }
                } else {
                    eps2_expected = past_or_forecast_var(idx);  // E[eps^2] = sigma^2
                    if (spec.family == GarchFamily::gjrgarch) {
                        asym = 0.5 * params.gamma_asym[static_cast<std::size_t>(i - 1)] *
                               eps2_expected;
                    }
                }
                s2 += params.alpha[static_cast<std::size_t>(i - 1)] * eps2_expected + asym;
            }
            for (int j = 1; j <= spec.s; ++j) {
                s2 += params.beta[static_cast<std::size_t>(j - 1)] * past_or_forecast_var(t - j);
            }
        }
        if (!std::isfinite(s2) || !(s2 > 0.0)) {
            throw FitError("forecast_garch: non-positive variance forecast at step " +
                           std::to_string(step));
        }
        out.variance.push_back(s2);
    }
    return out;
}

}  // namespace rainrisk
