#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rainrisk/errors.hpp"
#include "rainrisk/optimize.hpp"

#include <cmath>
#include <string>
#include <vector>

using namespace rainrisk;

namespace {

double rosenbrock(const std::vector<double>& x) {
    double f = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        const double a = x[i + 1] - x[i] * x[i];
        const double b = 1.0 - x[i];
        f += 100.0 * a * a + b * b;
    }
    return f;
}

}  // namespace

TEST_CASE("nelder_mead: scalar quadratic") {
    OptProblem problem;
    problem.objective = [](const std::vector<double>& x) { return (x[0] - 3.0) * (x[0] - 3.0); };
    problem.x0 = {0.0};
    problem.tol_x = 1e-7;
    const OptResult r = nelder_mead(problem);
    CHECK(r.converged);
    CHECK(std::abs(r.x_best[0] - 3.0) < 1e-4);
}

TEST_CASE("nelder_mead: 4-dimensional Rosenbrock from the origin") {
    OptProblem problem;
    problem.objective = rosenbrock;
    problem.x0 = std::vector<double>(4, 0.0);
    problem.max_evals = 20000;
    problem.tol_x = 1e-10;
    problem.tol_f = 1e-14;
    const OptResult coarse = nelder_mead(problem);
    const OptResult r = bfgs_polish(problem, coarse.x_best);
    CHECK(r.f_best < 1e-4);
}

TEST_CASE("nelder_mead: constant objective converges at the start") {
    OptProblem problem;
    problem.objective = [](const std::vector<double>&) { return 7.5; };
    problem.x0 = {1.0, 2.0};
    const OptResult r = nelder_mead(problem);
    CHECK(r.converged);
    CHECK(r.f_best == 7.5);
    CHECK(r.x_best == std::vector<double>{1.0, 2.0});
}

TEST_CASE("nelder_mead: max_evals exhaustion returns best-so-far") {
    OptProblem problem;
    problem.objective = rosenbrock;
    problem.x0 = std::vector<double>(6, -2.0);
    problem.max_evals = 50;
    const OptResult r = nelder_mead(problem);
    CHECK_FALSE(r.converged);
    CHECK(r.evals >= 50);
    CHECK(r.f_best <= rosenbrock(problem.x0));
}

TEST_CASE("bfgs_polish: SPD quadratic solved to high accuracy") {
    // x'Ax with A = [[4,1,0],[1,3,1],[0,1,2]]
    OptProblem problem;
    problem.objective = [](const std::vector<double>& x) {
        return 4 * x[0] * x[0] + 3 * x[1] * x[1] + 2 * x[2] * x[2] + 2 * x[0] * x[1] +
               2 * x[1] * x[2];
    };
    problem.x0 = {0.0, 0.0, 0.0};
    const OptResult r = bfgs_polish(problem, {1.5, -2.0, 3.0});
    CHECK(r.f_best < 1e-8);
}

TEST_CASE("bfgs_polish: never worse than the starting point") {
    OptProblem problem;
    problem.objective = rosenbrock;
    for (double s0 : {-1.5, 0.0, 0.7, 2.0}) {
        const std::vector<double> start = {s0, s0 * 0.5, -s0, 1.0};
        const OptResult r = bfgs_polish(problem, start);
        CHECK(r.f_best <= rosenbrock(start) + 1e-12);
    }
}

TEST_CASE("finite_diff_gradient: quadratic and linear cases") {
    const Objective sum_sq = [](const std::vector<double>& x) {
        double s = 0.0;
        for (double v : x) {
            s += v * v;
        }
        return s;
    };
    const std::vector<double> g = finite_diff_gradient(sum_sq, {1.0, 2.0}, 1e-6);
    CHECK(g[0] == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(g[1] == doctest::Approx(4.0).epsilon(1e-6));

    const Objective linear = [](const std::vector<double>& x) {
        return 3.0 * x[0] - 7.0 * x[1] + 0.5 * x[2];
    };
    const std::vector<double> gl = finite_diff_gradient(linear, {0.3, -0.2, 0.1}, 1e-6);
    CHECK(std::abs(gl[0] - 3.0) < 1e-9);
    CHECK(std::abs(gl[1] + 7.0) < 1e-9);
    CHECK(std::abs(gl[2] - 0.5) < 1e-9);
}

TEST_CASE("finite_diff_gradient: non-finite probe names the coordinate") {
    const Objective partial = [](const std::vector<double>& x) {
        return x[1] > 0.5 ? std::nan("") : x[0];
    };
    try {
        finite_diff_gradient(partial, {0.0, 0.5}, 1e-2);
        FAIL("expected FitError");
    } catch (const FitError& e) {
        CHECK(std::string(e.what()).find("coordinate 1") != std::string::npos);
    }
}

TEST_CASE("determinism: identical problem and seed give identical traces") {
    OptProblem problem;
    problem.objective = rosenbrock;
    problem.x0 = {0.2, -0.3, 0.4, 0.0};
    problem.max_evals = 3000;
    problem.seed = 99;
    problem.record_trace = true;
    const OptResult a = nelder_mead(problem);
    const OptResult b = nelder_mead(problem);
    REQUIRE(a.trace.size() == b.trace.size());
    for (std::size_t i = 0; i < a.trace.size(); ++i) {
        CHECK(a.trace[i].first == b.trace[i].first);
        CHECK(a.trace[i].second == b.trace[i].second);
    }
    CHECK(a.x_best == b.x_best);

    problem.seed = 100;
    const OptResult c = nelder_mead(problem);
    bool any_difference = (c.trace.size() != a.trace.size());
    for (std::size_t i = 0; !any_difference && i < a.trace.size(); ++i) {
        any_difference = a.trace[i].second != c.trace[i].second;
    }
    CHECK(any_difference);  // the jitter seed genuinely enters
}

TEST_CASE("monotone best: running best along the trace never increases") {
    OptProblem problem;
    problem.objective = rosenbrock;
    problem.x0 = {-1.0, 2.0, 0.5, 0.0};
    problem.max_evals = 4000;
    problem.record_trace = true;
    const OptResult r = minimize(problem);
    double best = 1e300;
    double best_seen_at_end = 0.0;
    for (const auto& [idx, f] : r.trace) {
        best = std::min(best, f);
        best_seen_at_end = best;
    }
    CHECK(best_seen_at_end == doctest::Approx(r.f_best));
}

TEST_CASE("penalty safety: sentinel regions never win") {
    // objective is penalized on half the space, quadratic on the other half
    OptProblem problem;
    problem.objective = [](const std::vector<double>& x) {
        if (x[0] < 0.0) {
            return kPenalty;
        }
        return (x[0] - 1.0) * (x[0] - 1.0) + 1.0;
    };
    problem.x0 = {0.05};  // initial simplex straddles the penalty wall
    const OptResult r = minimize(problem);
    CHECK(r.f_best < 0.5 * kPenalty);
    CHECK(r.x_best[0] >= 0.0);
    CHECK(r.f_best == doctest::Approx(1.0).epsilon(1e-6));
}
