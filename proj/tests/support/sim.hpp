// Deterministic simulators for the recovery and property tests.
#pragma once

#include "rainrisk/garch.hpp"
#include "rainrisk/mean_model.hpp"
#include "rainrisk/series.hpp"

#include <array>
#include <cstdint>
#include <random>
#include <vector>

namespace sim {

inline std::vector<double> gaussian(int n, std::uint64_t seed, double mean = 0.0,
                                    double sd = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(mean, sd);
    std::vector<double> out(static_cast<std::size_t>(n));
    for (double& v : out) {
        v = dist(rng);
    }
    return out;
}

// Forward model matched to the CSS residual recursion: presample shocks are
// zero and presample observations sit at the model-implied level, so the
// shock sequence is exactly recoverable.
inline std::vector<double> arma_from_shocks(const rainrisk::MeanSpec& spec,
                                            const rainrisk::MeanParams& params,
                                            const std::vector<double>& shocks,
                                            const rainrisk::ExogRows& exog = {}) {
    const int n = static_cast<int>(shocks.size());
    const double presample_y = rainrisk::detail::presample_level(spec, params, exog);
    std::vector<double> y(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t) {
        double v = params.constant + shocks[static_cast<std::size_t>(t)];
        for (int i = 1; i <= spec.p; ++i) {
            v += params.ar[static_cast<std::size_t>(i - 1)] *
                 ((t - i >= 0) ? y[static_cast<std::size_t>(t - i)] : presample_y);
        }
        for (int j = 1; j <= spec.q; ++j) {
            if (t - j >= 0) {
                v += params.ma[static_cast<std::size_t>(j - 1)] *
                     shocks[static_cast<std::size_t>(t - j)];
            }
        }
        for (int k = 0; k < spec.exog_count; ++k) {
            v += params.exog[static_cast<std::size_t>(k)] *
                 exog[static_cast<std::size_t>(t)][static_cast<std::size_t>(k)];
        }
        y[static_cast<std::size_t>(t)] = v;
    }
    return y;
}

// Stationary ARMA path with burn-in, for parameter-recovery experiments.
inline std::vector<double> arma_path(const rainrisk::MeanSpec& spec,
                                     const rainrisk::MeanParams& params, int n, double sigma,
                                     std::uint64_t seed, int burn = 200) {
    const std::vector<double> shocks = gaussian(n + burn, seed, 0.0, sigma);
    const std::vector<double> full = arma_from_shocks(spec, params, shocks);
    return std::vector<double>(full.end() - n, full.end());
}

struct GarchPath {
    std::vector<double> y;
    std::vector<double> sigma2;
};

// sGARCH(1,1) path with Gaussian innovations; also covers iGARCH when
// alpha + beta = 1.
inline GarchPath sgarch_path(double mu, double omega, double alpha, double beta, int n,
                             std::uint64_t seed, int burn = 500) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    const double persistence = alpha + beta;
    double s2 = persistence < 1.0 ? omega / (1.0 - persistence) : omega * 50.0;
    GarchPath out;
    out.y.reserve(static_cast<std::size_t>(n));
    out.sigma2.reserve(static_cast<std::size_t>(n));
    double eps = 0.0;
    for (int t = -burn; t < n; ++t) {
        if (t > -burn) {
            s2 = omega + alpha * eps * eps + beta * s2;
        }
        eps = std::sqrt(s2) * dist(rng);
        if (t >= 0) {
            out.sigma2.push_back(s2);
            out.y.push_back(mu + eps);
        }
    }
    return out;
}

// Synthetic monthly rainfall panel with a monsoon-shaped climatology and
// occasional dry-month zeros.
inline std::vector<std::array<double, 12>> rainfall_panel(int years, std::uint64_t seed,
                                                          double zero_share = 0.25) {
    static constexpr std::array<double, 12> clim = {6.0,  4.0,  9.0,   16.0,  42.0,  230.0,
                                                    450.0, 350.0, 180.0, 95.0, 28.0, 9.0};
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> logn(0.0, 0.45);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<std::array<double, 12>> rows(static_cast<std::size_t>(years));
    for (auto& row : rows) {
        for (int m = 0; m < 12; ++m) {
            double v = clim[static_cast<std::size_t>(m)] * std::exp(logn(rng));
            if (clim[static_cast<std::size_t>(m)] < 10.0 && unif(rng) < zero_share) {
                v = 0.0;
            }
            row[static_cast<std::size_t>(m)] = v;
        }
    }
    return rows;
}

}  // namespace sim
