#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

namespace rainrisk {

/// Finite sentinel objectives return from inadmissible regions. The
/// optimizers treat it as "very bad" rather than an error.
inline constexpr double kPenalty = 1e10;

using Objective = std::function<double(const std::vector<double>&)>;

struct OptProblem {
    Objective objective;
    std::vector<double> x0;
    int max_evals = 20000;
    double tol_x = 1e-8;
    double tol_f = 1e-10;
    std::uint64_t seed = 0;   // jitters the initial simplex
    bool record_trace = false;
};

struct OptResult {
    std::vector<double> x_best;
    double f_best = 0.0;
    int evals = 0;
    bool converged = false;
    std::vector<std::pair<int, double>> trace;  // (eval index, f) when recorded
};

/// Simplex search with the standard reflection/expansion/contraction/shrink
/// coefficients (1, 2, 0.5, 0.5).
OptResult nelder_mead(const OptProblem& problem);

/// Quasi-Newton refinement from x_start using central finite-difference
/// gradients and Armijo backtracking. Never returns a point worse than the
/// starting one.
OptResult bfgs_polish(const OptProblem& problem, const std::vector<double>& x_start);

/// Central-difference gradient with per-coordinate step rel_step*max(1,|x_i|).
std::vector<double> finite_diff_gradient(const Objective& f, const std::vector<double>& x,
                                         double rel_step);

/// Nelder-Mead followed by a BFGS polish; the workhorse behind every fit.
OptResult minimize(const OptProblem& problem);

}  // namespace rainrisk
