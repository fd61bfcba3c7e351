#include "rainrisk/mean_model.hpp"

#include "rainrisk/errors.hpp"
#include "rainrisk/optimize.hpp"
#include "rainrisk/stat_tests.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

namespace rainrisk {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;

void check_shapes(const MeanSpec& spec, const std::vector<double>& y, const ExogRows& exog) {
    if (spec.p < 0 || spec.q < 0 || spec.exog_count < 0 || spec.d < 0) {
        throw ValidationError("mean model orders must be non-negative");
    }
    if (spec.param_count() < 1) {
        throw ValidationError("degenerate mean model: no parameters at all");
    }
    if (static_cast<int>(y.size()) <= spec.p) {
        throw ValidationError("series too short for AR order " + std::to_string(spec.p));
    }
    if (spec.exog_count > 0) {
        if (exog.size() != y.size()) {
            throw ValidationError("exogenous rows (" + std::to_string(exog.size()) +
                                  ") must match series length (" + std::to_string(y.size()) + ")");
        }
        for (const auto& row : exog) {
            if (static_cast<int>(row.size()) != spec.exog_count) {
                throw ValidationError("exogenous row width must equal exog_count");
            }
        }
    }
}

void check_params(const MeanSpec& spec, const MeanParams& params) {
    if (static_cast<int>(params.ar.size()) != spec.p ||
        static_cast<int>(params.ma.size()) != spec.q ||
        static_cast<int>(params.exog.size()) != spec.exog_count) {
        throw ValidationError("mean parameter lengths disagree with the spec");
    }
}

// Yule-Walker AR start from sample autocorrelations of `values`.
std::vector<double> yule_walker_start(const std::vector<double>& values, int p) {
    if (p == 0) {
        return {};
    }
    const int n = static_cast<int>(values.size());
    double mean = 0.0;
    for (double v : values) {
        mean += v;
    }
    mean /= static_cast<double>(n);
    std::vector<double> acf(static_cast<std::size_t>(p + 1), 0.0);
    for (int k = 0; k <= p; ++k) {
        double s = 0.0;
        for (int t = k; t < n; ++t) {
            s += (values[static_cast<std::size_t>(t)] - mean) *
                 (values[static_cast<std::size_t>(t - k)] - mean);
        }
        acf[static_cast<std::size_t>(k)] = s / static_cast<double>(n);
    }
    if (acf[0] <= 0.0) {
        return std::vector<double>(static_cast<std::size_t>(p), 0.0);
    }
    // Levinson-Durbin with reflection coefficients clamped inside (-1, 1).
    std::vector<double> phi(static_cast<std::size_t>(p), 0.0);
    std::vector<double> prev(static_cast<std::size_t>(p), 0.0);
    double err = acf[0];
    for (int k = 1; k <= p; ++k) {
        double num = acf[static_cast<std::size_t>(k)];
        for (int j = 1; j < k; ++j) {
            num -= prev[static_cast<std::size_t>(j - 1)] * acf[static_cast<std::size_t>(k - j)];
        }
        double r = (err > 0.0) ? num / err : 0.0;
        r = std::clamp(r, -0.95, 0.95);
        phi[static_cast<std::size_t>(k - 1)] = r;
        for (int j = 1; j < k; ++j) {
            phi[static_cast<std::size_t>(j - 1)] =
                prev[static_cast<std::size_t>(j - 1)] - r * prev[static_cast<std::size_t>(k - j - 1)];
        }
        err *= (1.0 - r * r);
        for (int j = 0; j < k; ++j) {
            prev[static_cast<std::size_t>(j)] = phi[static_cast<std::size_t>(j)];
        }
    }
    return phi;
}

}  // namespace

namespace transforms {

std::vector<double> pacf_to_coeffs(const std::vector<double>& pacf) {
    const int p = static_cast<int>(pacf.size());
    std::vector<double> phi(pacf.size(), 0.0);
    std::vector<double> prev(pacf.size(), 0.0);
    for (int k = 1; k <= p; ++k) {
        const double r = pacf[static_cast<std::size_t>(k - 1)];
        phi[static_cast<std::size_t>(k - 1)] = r;
        for (int j = 1; j < k; ++j) {
            phi[static_cast<std::size_t>(j - 1)] =
                prev[static_cast<std::size_t>(j - 1)] - r * prev[static_cast<std::size_t>(k - j - 1)];
        }
        for (int j = 0; j < k; ++j) {
            prev[static_cast<std::size_t>(j)] = phi[static_cast<std::size_t>(j)];
        }
    }
    return phi;
}

std::vector<double> coeffs_to_pacf(const std::vector<double>& coeffs) {
    const int p = static_cast<int>(coeffs.size());
    std::vector<double> pacf(coeffs.size(), 0.0);
    std::vector<double> work = coeffs;
    for (int k = p; k >= 1; --k) {
        const double r = work[static_cast<std::size_t>(k - 1)];
        if (!(std::abs(r) < 1.0)) {
            throw FitError("coefficients outside the stationary/invertible region");
        }
        pacf[static_cast<std::size_t>(k - 1)] = r;
        std::vector<double> lower(static_cast<std::size_t>(k - 1), 0.0);
        const double denom = 1.0 - r * r;
        for (int j = 1; j < k; ++j) {
            lower[static_cast<std::size_t>(j - 1)] =
                (work[static_cast<std::size_t>(j - 1)] + r * work[static_cast<std::size_t>(k - j - 1)]) /
                denom;
        }
        work = std::move(lower);
    }
    return pacf;
}

std::vector<double> unconstrained_to_coeffs(const std::vector<double>& raw) {
    std::vector<double> pacf(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        // tanh saturates to exactly +-1 in double for |raw| > ~19, which
        // would put the coefficients on the boundary; keep strictly inside.
        pacf[i] = std::clamp(std::tanh(raw[i]), -0.999999999999, 0.999999999999);
    }
    return pacf_to_coeffs(pacf);
}

std::vector<double> coeffs_to_unconstrained(const std::vector<double>& coeffs) {
    std::vector<double> pacf = coeffs_to_pacf(coeffs);
    std::vector<double> raw(pacf.size());
    for (std::size_t i = 0; i < pacf.size(); ++i) {
        raw[i] = std::atanh(std::clamp(pacf[i], -0.999999, 0.999999));
    }
    return raw;
}

}  // namespace transforms

namespace detail {

double presample_level(const MeanSpec& spec, const MeanParams& params, const ExogRows& exog) {
    if (spec.p == 0) {
        return 0.0;
    }
    double c_eff = params.constant;
    if (spec.exog_count > 0 && !exog.empty()) {
        for (int k = 0; k < spec.exog_count; ++k) {
            double mean = 0.0;
            for (const auto& row : exog) {
                mean += row[static_cast<std::size_t>(k)];
            }
            c_eff += params.exog[static_cast<std::size_t>(k)] *
                     (mean / static_cast<double>(exog.size()));
        }
    }
    double ar_sum = 0.0;
    for (double phi : params.ar) {
        ar_sum += phi;
    }
    const double denom = 1.0 - ar_sum;
    if (std::abs(denom) < 1e-10) {
        return c_eff / (denom >= 0.0 ? 1e-10 : -1e-10);
    }
    return c_eff / denom;
}

bool css_residuals(const MeanSpec& spec, const MeanParams& params, const std::vector<double>& y,
                   const ExogRows& exog, std::vector<double>& eps) {
    const int n = static_cast<int>(y.size());
    const double presample_y = presample_level(spec, params, exog);
    eps.resize(y.size());
    for (int t = 0; t < n; ++t) {
        double pred = params.constant;
        for (int i = 1; i <= spec.p; ++i) {
            const double lag = (t - i >= 0) ? y[static_cast<std::size_t>(t - i)] : presample_y;
            pred += params.ar[static_cast<std::size_t>(i - 1)] * lag;
        }
        for (int j = 1; j <= spec.q; ++j) {
            if (t - j >= 0) {
                pred += params.ma[static_cast<std::size_t>(j - 1)] *
                        eps[static_cast<std::size_t>(t - j)];
            }
        }
        for (int k = 0; k < spec.exog_count; ++k) {
            pred += params.exog[static_cast<std::size_t>(k)] *
                    exog[static_cast<std::size_t>(t)][static_cast<std::size_t>(k)];
        }
        const double e = y[static_cast<std::size_t>(t)] - pred;
        if (!std::isfinite(e)) {
            return false;
        }
        eps[static_cast<std::size_t>(t)] = e;
    }
    return true;
}

MeanParams unpack_mean(const MeanSpec& spec, const std::vector<double>& x, std::size_t& pos) {
    MeanParams params;
    if (spec.include_constant) {
        params.constant = x[pos++];
    }
    std::vector<double> raw_ar(x.begin() + static_cast<std::ptrdiff_t>(pos),
                               x.begin() + static_cast<std::ptrdiff_t>(pos + spec.p));
    pos += static_cast<std::size_t>(spec.p);
    std::vector<double> raw_ma(x.begin() + static_cast<std::ptrdiff_t>(pos),
                               x.begin() + static_cast<std::ptrdiff_t>(pos + spec.q));
    pos += static_cast<std::size_t>(spec.q);
    params.ar = transforms::unconstrained_to_coeffs(raw_ar);
    std::vector<double> ma_neg = transforms::unconstrained_to_coeffs(raw_ma);
    params.ma.resize(ma_neg.size());
    for (std::size_t j = 0; j < ma_neg.size(); ++j) {
        params.ma[j] = -ma_neg[j];
    }
    params.exog.assign(x.begin() + static_cast<std::ptrdiff_t>(pos),
                       x.begin() + static_cast<std::ptrdiff_t>(pos + spec.exog_count));
    pos += static_cast<std::size_t>(spec.exog_count);
    return params;
}

void pack_mean(const MeanSpec& spec, const MeanParams& params, std::vector<double>& out) {
    if (spec.include_constant) {
        out.push_back(params.constant);
    }
    for (double r : transforms::coeffs_to_unconstrained(params.ar)) {
        out.push_back(r);
    }
    std::vector<double> ma_neg(params.ma.size());
    for (std::size_t j = 0; j < params.ma.size(); ++j) {
        ma_neg[j] = -params.ma[j];
    }
    for (double r : transforms::coeffs_to_unconstrained(ma_neg)) {
        out.push_back(r);
    }
    for (double g : params.exog) {
        out.push_back(g);
    }
}

Standardization standardize(ExogRows& exog, int exog_count, bool allow_centering) {
    Standardization s;
    s.center.assign(static_cast<std::size_t>(exog_count), 0.0);
    s.scale.assign(static_cast<std::size_t>(exog_count), 1.0);
    if (exog_count == 0 || exog.empty()) {
        return s;
    }
    const double n = static_cast<double>(exog.size());
    for (int k = 0; k < exog_count; ++k) {
        double mean = 0.0;
        for (const auto& row : exog) {
            mean += row[static_cast<std::size_t>(k)];
        }
        mean /= n;
        double var = 0.0;
        for (const auto& row : exog) {
            const double d = row[static_cast<std::size_t>(k)] - mean;
            var += d * d;
        }
        var /= n;
        const double sd = std::sqrt(var);
        s.center[static_cast<std::size_t>(k)] = allow_centering ? mean : 0.0;
        s.scale[static_cast<std::size_t>(k)] = (sd > 1e-12) ? sd : 1.0;
        for (auto& row : exog) {
            row[static_cast<std::size_t>(k)] =
                (row[static_cast<std::size_t>(k)] - s.center[static_cast<std::size_t>(k)]) /
                s.scale[static_cast<std::size_t>(k)];
        }
    }
    return s;
}

}  // namespace detail

bool is_stationary(const std::vector<double>& ar) {
    try {
        for (double r : transforms::coeffs_to_pacf(ar)) {
            if (!(std::abs(r) < 1.0)) {
                return false;
            }
        }
    } catch (const FitError&) {
        return false;
    }
    return true;
}

bool is_invertible(const std::vector<double>& ma) {
    std::vector<double> neg(ma.size());
    for (std::size_t j = 0; j < ma.size(); ++j) {
        neg[j] = -ma[j];
    }
    return is_stationary(neg);
}

std::vector<double> arma_residuals(const MeanSpec& spec, const MeanParams& params,
                                   const std::vector<double>& y, const ExogRows& exog) {
    check_shapes(spec, y, exog);
    check_params(spec, params);
    std::vector<double> eps;
    if (!detail::css_residuals(spec, params, y, exog, eps)) {
        throw FitError("arma_residuals: non-finite residual encountered");
    }
    return eps;
}

double css_loglik(const MeanSpec& spec, const MeanParams& params, const std::vector<double>& y,
                  const ExogRows& exog, double sigma2) {
    if (!(sigma2 > 0.0)) {
        throw ValidationError("css_loglik requires sigma2 > 0");
    }
    const std::vector<double> eps = arma_residuals(spec, params, y, exog);
    double ll = 0.0;
    for (double e : eps) {
        ll -= 0.5 * (kLog2Pi + std::log(sigma2) + e * e / sigma2);
    }
    if (!std::isfinite(ll)) {
        throw FitError("css_loglik: non-finite log-likelihood");
    }
    return ll;
}

MeanFit fit_mean(const MeanSpec& spec, const DifferencedSeries& y, const ExogRows& exog,
                 const FitOptions& options) {
    if (spec.d != y.order) {
        throw ValidationError("spec.d (" + std::to_string(spec.d) +
                              ") must match the differencing order of the data (" +
                              std::to_string(y.order) + ")");
    }
    check_shapes(spec, y.values, exog);
    const int n = y.size();
    if (n < spec.param_count() + 1) {
        throw ValidationError("training length " + std::to_string(n) +
                              " too short for a model with " + std::to_string(spec.param_count()) +
                              " parameters");
    }

    MeanFit fit;
    fit.spec = spec;
    fit.y = y.values;
    fit.exog = exog;
    fit.tail_levels = y.tail_levels;
    if (2 * n < 5 * (spec.param_count() + 1)) {
        fit.message = "training sample is thin for this parameter count";
    }

    ExogRows exog_std = exog;
    const detail::Standardization std_info =
        detail::standardize(exog_std, spec.exog_count, spec.include_constant);

    const double n_d = static_cast<double>(n);
    auto objective = [&](const std::vector<double>& x) {
        MeanParams params;
        try {
            std::size_t pos = 0;
            params = detail::unpack_mean(spec, x, pos);
        } catch (const FitError&) {
            return kPenalty;
        }
        std::vector<double> eps;
        if (!detail::css_residuals(spec, params, y.values, exog_std, eps)) {
            return kPenalty;
        }
        double ssr = 0.0;
        for (double e : eps) {
            ssr += e * e;
        }
        if (!std::isfinite(ssr)) {
            return kPenalty;
        }
        ssr = std::max(ssr, 1e-300);
        return 0.5 * n_d * (kLog2Pi + std::log(ssr / n_d) + 1.0);
    };

    // Start list: a moment-based warm start, a neutral start, and (with
    // regressors) the nested no-regressor optimum with gamma = 0. The nested
    // start keeps the maximized likelihood monotone when regressors are added.
    std::vector<std::vector<double>> starts;
    {
        MeanParams warm;
        double mean_y = 0.0;
        for (double v : y.values) {
            mean_y += v;
        }
        mean_y /= n_d;
        warm.exog.assign(static_cast<std::size_t>(spec.exog_count), 0.0);
        std::vector<double> base = y.values;
        if (spec.exog_count > 0) {
            const int cols = 1 + spec.exog_count;
            std::vector<double> design(static_cast<std::size_t>(n * cols));
            for (int t = 0; t < n; ++t) {
                design[static_cast<std::size_t>(t * cols)] = 1.0;
                for (int k = 0; k < spec.exog_count; ++k) {
                    design[static_cast<std::size_t>(t * cols + 1 + k)] =
                        exog_std[static_cast<std::size_t>(t)][static_cast<std::size_t>(k)];
                }
            }
            try {
                const LeastSquaresFit ols = least_squares(design, n, cols, y.values);
                warm.constant = spec.include_constant ? ols.coefficients[0] : 0.0;
                for (int k = 0; k < spec.exog_count; ++k) {
                    warm.exog[static_cast<std::size_t>(k)] =
                        ols.coefficients[static_cast<std::size_t>(1 + k)];
                }
                base = ols.residuals;
            } catch (const Error&) {
                warm.constant = spec.include_constant ? mean_y : 0.0;
            }
        } else {
            warm.constant = spec.include_constant ? mean_y : 0.0;
            if (spec.include_constant) {
                for (double& v : base) {
                    v -= mean_y;
                }
            }
        }
        std::vector<double> phi0 = yule_walker_start(base, spec.p);
        if (!is_stationary(phi0)) {
            phi0.assign(static_cast<std::size_t>(spec.p), 0.0);
        }
        warm.ar = phi0;
        warm.ma.assign(static_cast<std::size_t>(spec.q), 0.0);
        if (spec.p > 0 && spec.include_constant) {
            // The recursion uses the intercept form, not the mean form.
            double ar_sum = 0.0;
            for (double v : warm.ar) {
                ar_sum += v;
            }
            warm.constant *= (1.0 - ar_sum);
        }
        std::vector<double> packed;
        detail::pack_mean(spec, warm, packed);
        starts.push_back(packed);

        MeanParams neutral;
        neutral.constant = spec.include_constant ? mean_y : 0.0;
        neutral.ar.assign(static_cast<std::size_t>(spec.p), 0.0);
        neutral.ma.assign(static_cast<std::size_t>(spec.q), 0.0);
        neutral.exog.assign(static_cast<std::size_t>(spec.exog_count), 0.0);
        packed.clear();
        detail::pack_mean(spec, neutral, packed);
        starts.push_back(packed);

        if (spec.exog_count > 0) {
            MeanSpec nested_spec = spec;
            nested_spec.exog_count = 0;
            if (nested_spec.param_count() >= 1) {
                const MeanFit nested = fit_mean(nested_spec, y, {}, options);
                MeanParams from_nested = nested.params;
                from_nested.exog.assign(static_cast<std::size_t>(spec.exog_count), 0.0);
                packed.clear();
                detail::pack_mean(spec, from_nested, packed);
                starts.push_back(packed);
            }
        } else {
            std::vector<double> jittered = starts.front();
            for (double& v : jittered) {
                v += 0.25;
            }
            starts.push_back(jittered);
        }
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
        throw FitError("fit_mean: no admissible parameter point found");
    }

    std::size_t pos = 0;
    const MeanParams params_std = detail::unpack_mean(spec, best.x_best, pos);
    fit.params = params_std;
    for (int k = 0; k < spec.exog_count; ++k) {
        const double g = params_std.exog[static_cast<std::size_t>(k)];
        fit.params.exog[static_cast<std::size_t>(k)] =
            g / std_info.scale[static_cast<std::size_t>(k)];
        fit.params.constant -= g * std_info.center[static_cast<std::size_t>(k)] /
                               std_info.scale[static_cast<std::size_t>(k)];
    }

    fit.residuals = arma_residuals(spec, fit.params, y.values, exog);
    double ssr = 0.0;
    for (double e : fit.residuals) {
        ssr += e * e;
    }
    fit.sigma2 = std::max(ssr / n_d, 1e-300);
    fit.loglik = -0.5 * n_d * (kLog2Pi + std::log(fit.sigma2) + 1.0);
    const int k_params = spec.param_count() + 1;  // + sigma2
    fit.aic_raw = 2.0 * k_params - 2.0 * fit.loglik;
    fit.aic_per_obs = fit.aic_raw / n_d;
    fit.converged = best.converged;
    return fit;
}

MeanForecast forecast_mean(const MeanFit& fit, int h, const ExogRows& future_exog) {
    if (h < 1) {
        throw ValidationError("forecast horizon must be at least 1");
    }
    const MeanSpec& spec = fit.spec;
    if (spec.exog_count > 0) {
        if (static_cast<int>(future_exog.size()) < h) {
            throw ValidationError("forecasting " + std::to_string(h) + " steps needs " +
                                  std::to_string(h) + " future exogenous rows, got " +
                                  std::to_string(future_exog.size()));
        }
        for (const auto& row : future_exog) {
            if (static_cast<int>(row.size()) != spec.exog_count) {
                throw ValidationError("future exogenous row width must equal exog_count");
            }
        }
    }

    const int n = static_cast<int>(fit.y.size());
    const double presample_y = detail::presample_level(spec, fit.params, fit.exog);
    std::vector<double> extended = fit.y;
    extended.reserve(fit.y.size() + static_cast<std::size_t>(h));
    MeanForecast out;
    out.differenced.reserve(static_cast<std::size_t>(h));
    for (int step = 1; step <= h; ++step) {
        const int t = n - 1 + step;
        double pred = fit.params.constant;
        for (int i = 1; i <= spec.p; ++i) {
            const double lag = (t - i >= 0) ? extended[static_cast<std::size_t>(t - i)] : presample_y;
            pred += fit.params.ar[static_cast<std::size_t>(i - 1)] * lag;
        }
        for (int j = 1; j <= spec.q; ++j) {
            const int idx = t - j;
            if (idx >= 0 && idx < n) {
                pred += fit.params.ma[static_cast<std::size_t>(j - 1)] *
                        fit.residuals[static_cast<std::size_t>(idx)];
            }
            // future shocks enter as zero
        }
        for (int k = 0; k < spec.exog_count; ++k) {
            pred += fit.params.exog[static_cast<std::size_t>(k)] *
                    future_exog[static_cast<std::size_t>(step - 1)][static_cast<std::size_t>(k)];
        }
        extended.push_back(pred);
        out.differenced.push_back(pred);
    }
    out.levels = integrate(out.differenced, fit.tail_levels, spec.d);
    return out;
}

MeanSpec select_order(const DifferencedSeries& y, const ExogRows& exog, bool include_constant,
                      int exog_count, int max_order, const FitOptions& options) {
    MeanSpec best_spec;
    double best_aic = std::numeric_limits<double>::infinity();
    bool any = false;
    for (int p = 0; p <= max_order; ++p) {
        for (int q = 0; q <= max_order; ++q) {
            MeanSpec spec;
            spec.p = p;
            spec.d = y.order;
            spec.q = q;
            spec.include_constant = include_constant;
            spec.exog_count = exog_count;
            if (spec.param_count() < 1 || y.size() < spec.param_count() + 2) {
                continue;
            }
            try {
                const MeanFit fit = fit_mean(spec, y, exog, options);
                if (fit.aic_raw < best_aic - 1e-9) {
                    best_aic = fit.aic_raw;
                    best_spec = spec;
                    any = true;
                }
            } catch (const Error&) {
                continue;  // infeasible order, skip
            }
        }
    }
    if (!any) {
        throw FitError("select_order: no candidate order could be fitted");
    }
    return best_spec;
}

}  // namespace rainrisk
