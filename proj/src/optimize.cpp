#include "rainrisk/optimize.hpp"

#include "rainrisk/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace rainrisk {

namespace {

struct Evaluator {
    const OptProblem& problem;
    OptResult& result;

    double operator()(const std::vector<double>& x) {
        double f = problem.objective(x);
        if (!std::isfinite(f)) {
            f = kPenalty;
        }
        ++result.evals;
        if (f < result.f_best || result.evals == 1) {
            result.f_best = f;
            result.x_best = x;
        }
        if (problem.record_trace) {
            result.trace.emplace_back(result.evals, f);
        }
        return f;
    }

    bool exhausted() const { return result.evals >= problem.max_evals; }
};

}  // namespace

OptResult nelder_mead(const OptProblem& problem) {
    const int n = static_cast<int>(problem.x0.size());
    if (n < 1) {
        throw ValidationError("nelder_mead needs at least one parameter");
    }
    OptResult result;
    result.f_best = std::numeric_limits<double>::infinity();
    Evaluator eval{problem, result};

    // Initial simplex: x0 plus one jittered step per coordinate.
    std::mt19937_64 rng(problem.seed);
    std::uniform_real_distribution<double> jitter(0.9, 1.1);
    std::vector<std::vector<double>> simplex(static_cast<std::size_t>(n + 1), problem.x0);
    std::vector<double> fvals(static_cast<std::size_t>(n + 1));
    for (int i = 0; i < n; ++i) {
        const double step = 0.1 * std::max(1.0, std::abs(problem.x0[static_cast<std::size_t>(i)]));
        simplex[static_cast<std::size_t>(i + 1)][static_cast<std::size_t>(i)] += step * jitter(rng);
    }
    for (int i = 0; i <= n; ++i) {
        fvals[static_cast<std::size_t>(i)] = eval(simplex[static_cast<std::size_t>(i)]);
    }

    std::vector<std::size_t> order(static_cast<std::size_t>(n + 1));
    while (!eval.exhausted()) {
        for (std::size_t i = 0; i < order.size(); ++i) {
            order[i] = i;
        }
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return fvals[a] < fvals[b]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second_worst = order[order.size() - 2];

        double diameter = 0.0;
        for (std::size_t i = 0; i <= static_cast<std::size_t>(n); ++i) {
            for (int j = 0; j < n; ++j) {
                diameter = std::max(diameter,
                                    std::abs(simplex[i][static_cast<std::size_t>(j)] -
                                             simplex[best][static_cast<std::size_t>(j)]));
            }
        }
        const double spread = fvals[worst] - fvals[best];
        if (diameter < problem.tol_x || spread < problem.tol_f) {
            result.converged = true;
            break;
        }

        std::vector<double> centroid(static_cast<std::size_t>(n), 0.0);
        for (std::size_t i = 0; i <= static_cast<std::size_t>(n); ++i) {
            if (i == worst) continue;
            for (int j = 0; j < n; ++j) {
                centroid[static_cast<std::size_t>(j)] += simplex[i][static_cast<std::size_t>(j)];
            }
        }
        for (double& c : centroid) {
            c /= static_cast<double>(n);
        }

        auto blend = [&](double coeff) {
            std::vector<double> x(static_cast<std::size_t>(n));
            for (int j = 0; j < n; ++j) {
                x[static_cast<std::size_t>(j)] =
                    centroid[static_cast<std::size_t>(j)] +
                    coeff * (centroid[static_cast<std::size_t>(j)] -
                             simplex[worst][static_cast<std::size_t>(j)]);
            }
            return x;
        };

        std::vector<double> reflected = blend(1.0);
        const double f_reflected = eval(reflected);
        if (f_reflected < fvals[best]) {
            std::vector<double> expanded = blend(2.0);
            const double f_expanded = eval(expanded);
            if (f_expanded < f_reflected) {
                simplex[worst] = std::move(expanded);
                fvals[worst] = f_expanded;
            } else {
                simplex[worst] = std::move(reflected);
                fvals[worst] = f_reflected;
            }
        } else if (f_reflected < fvals[second_worst]) {
            simplex[worst] = std::move(reflected);
            fvals[worst] = f_reflected;
        } else {
            const bool outside = f_reflected < fvals[worst];
            std::vector<double> contracted = blend(outside ? 0.5 : -0.5);
            const double f_contracted = eval(contracted);
            const double pivot = outside ? f_reflected : fvals[worst];
            if (f_contracted < pivot) {
                simplex[worst] = std::move(contracted);
                fvals[worst] = f_contracted;
            } else {
                // Shrink towards the best vertex.
                for (std::size_t i = 0; i <= static_cast<std::size_t>(n); ++i) {
                    if (i == best) continue;
                    for (int j = 0; j < n; ++j) {
                        simplex[i][static_cast<std::size_t>(j)] =
                            simplex[best][static_cast<std::size_t>(j)] +
                            0.5 * (simplex[i][static_cast<std::size_t>(j)] -
                                   simplex[best][static_cast<std::size_t>(j)]);
                    }
                    fvals[i] = eval(simplex[i]);
                    if (eval.exhausted()) break;
                }
            }
        }
    }
    return result;
}

std::vector<double> finite_diff_gradient(const Objective& f, const std::vector<double>& x,
                                         double rel_step) {
    std::vector<double> grad(x.size());
    std::vector<double> probe = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double h = rel_step * std::max(1.0, std::abs(x[i]));
        probe[i] = x[i] + h;
        const double fp = f(probe);
        probe[i] = x[i] - h;
        const double fm = f(probe);
        probe[i] = x[i];
        if (!std::isfinite(fp) || !std::isfinite(fm)) {
            throw FitError("finite_diff_gradient: non-finite objective probing coordinate " +
                           std::to_string(i));
        }
        grad[i] = (fp - fm) / (2.0 * h);
    }
    return grad;
}

OptResult bfgs_polish(const OptProblem& problem, const std::vector<double>& x_start) {
    const int n = static_cast<int>(x_start.size());
    OptResult result;
    result.f_best = std::numeric_limits<double>::infinity();
    Evaluator eval{problem, result};

    const double grad_step = std::cbrt(std::numeric_limits<double>::epsilon());
    std::vector<double> x = x_start;
    double fx = eval(x);
    if (fx >= 0.5 * kPenalty) {
        // Nothing differentiable to work with; report the start.
        return result;
    }

    // Inverse-Hessian approximation, identity to start.
    std::vector<double> h_inv(static_cast<std::size_t>(n * n), 0.0);
    for (int i = 0; i < n; ++i) {
        h_inv[static_cast<std::size_t>(i * n + i)] = 1.0;
    }
    auto grad_at = [&](const std::vector<double>& point) {
        std::vector<double> g(point.size());
        std::vector<double> probe = point;
        for (int i = 0; i < n; ++i) {
            const double h = grad_step * std::max(1.0, std::abs(point[static_cast<std::size_t>(i)]));
            probe[static_cast<std::size_t>(i)] = point[static_cast<std::size_t>(i)] + h;
            const double fp = eval(probe);
            probe[static_cast<std::size_t>(i)] = point[static_cast<std::size_t>(i)] - h;
            const double fm = eval(probe);
            probe[static_cast<std::size_t>(i)] = point[static_cast<std::size_t>(i)];
            g[static_cast<std::size_t>(i)] = (fp - fm) / (2.0 * h);
        }
        return g;
    };

    std::vector<double> grad = grad_at(x);
    for (int iter = 0; iter < 200 && !eval.exhausted(); ++iter) {
        double gnorm = 0.0;
        for (double g : grad) {
            gnorm += g * g;
        }
        gnorm = std::sqrt(gnorm);
        if (gnorm < 1e-6) {
            result.converged = true;
            break;
        }

        std::vector<double> direction(static_cast<std::size_t>(n), 0.0);
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int j = 0; j < n; ++j) {
                s += h_inv[static_cast<std::size_t>(i * n + j)] * grad[static_cast<std::size_t>(j)];
            }
            direction[static_cast<std::size_t>(i)] = -s;
        }
        double slope = 0.0;
        for (int i = 0; i < n; ++i) {
            slope += direction[static_cast<std::size_t>(i)] * grad[static_cast<std::size_t>(i)];
        }
        if (slope >= 0.0) {
            // Reset a corrupted curvature model and retry with steepest descent.
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) {
                    h_inv[static_cast<std::size_t>(i * n + j)] = (i == j) ? 1.0 : 0.0;
                }
                direction[static_cast<std::size_t>(i)] = -grad[static_cast<std::size_t>(i)];
            }
            slope = -gnorm * gnorm;
        }

        // Armijo backtracking.
        double step = 1.0;
        std::vector<double> x_new(static_cast<std::size_t>(n));
        double f_new = fx;
        bool accepted = false;
        for (int ls = 0; ls < 40 && !eval.exhausted(); ++ls) {
            for (int i = 0; i < n; ++i) {
                x_new[static_cast<std::size_t>(i)] =
                    x[static_cast<std::size_t>(i)] + step * direction[static_cast<std::size_t>(i)];
            }
            f_new = eval(x_new);
            if (f_new <= fx + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            break;  // line search stalled; best-so-far already recorded
        }

        std::vector<double> grad_new = grad_at(x_new);
        std::vector<double> s(static_cast<std::size_t>(n));
        std::vector<double> y(static_cast<std::size_t>(n));
        double sy = 0.0;
        for (int i = 0; i < n; ++i) {
            s[static_cast<std::size_t>(i)] =
                x_new[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(i)];
            y[static_cast<std::size_t>(i)] =
                grad_new[static_cast<std::size_t>(i)] - grad[static_cast<std::size_t>(i)];
            sy += s[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i)];
        }
        if (sy > 1e-12) {
            // BFGS inverse update: H <- (I - s y'/sy) H (I - y s'/sy) + s s'/sy.
            std::vector<double> hy(static_cast<std::size_t>(n), 0.0);
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) {
                    hy[static_cast<std::size_t>(i)] +=
                        h_inv[static_cast<std::size_t>(i * n + j)] * y[static_cast<std::size_t>(j)];
                }
            }
            double yhy = 0.0;
            for (int i = 0; i < n; ++i) {
                yhy += y[static_cast<std::size_t>(i)] * hy[static_cast<std::size_t>(i)];
            }
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) {
                    const double sij = s[static_cast<std::size_t>(i)] * s[static_cast<std::size_t>(j)];
                    h_inv[static_cast<std::size_t>(i * n + j)] +=
                        (1.0 + yhy / sy) * sij / sy -
                        (s[static_cast<std::size_t>(i)] * hy[static_cast<std::size_t>(j)] +
                         hy[static_cast<std::size_t>(i)] * s[static_cast<std::size_t>(j)]) / sy;
                }
            }
        }
        x = x_new;
        fx = f_new;
        grad = std::move(grad_new);
    }

    // x_start was evaluated first, so f_best <= f(x_start) by construction.
    return result;
}

OptResult minimize(const OptProblem& problem) {
    OptResult coarse = nelder_mead(problem);
    OptProblem polish_problem = problem;
    polish_problem.max_evals = std::max(1000, problem.max_evals / 4);
    OptResult polished = bfgs_polish(polish_problem, coarse.x_best);
    if (problem.record_trace) {
        for (auto& [idx, f] : polished.trace) {
            idx += coarse.evals;
        }
        coarse.trace.insert(coarse.trace.end(), polished.trace.begin(), polished.trace.end());
    }
    if (polished.f_best <= coarse.f_best) {
        polished.trace = std::move(coarse.trace);
        polished.evals += coarse.evals;
        polished.converged = polished.converged || coarse.converged;
        return polished;
    }
    coarse.evals += polished.evals;
    return coarse;
}

}  // namespace rainrisk
