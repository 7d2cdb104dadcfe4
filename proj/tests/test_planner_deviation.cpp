#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "obsplan/planner_deviation.hpp"

using namespace obsplan;

namespace {

/// Section-5.1 style setup: double integrator tracking the origin under LQR,
/// light-source quadratic uncertainty.
struct LightScenario {
    LtiSystem sys;
    Trajectory nominal;
    QuadraticRadiusModel model;
    double eps;

    static LightScenario make(int horizon, double dt, double gamma_hint = 2.0) {
        (void)gamma_hint;
        LtiSystem sys = double_integrator_2d(dt);
        const Matrix q = Matrix::Identity(4, 4);
        const Matrix r = Matrix::Identity(2, 2);
        const Matrix qf = 20.0 * Matrix::Identity(4, 4);
        const auto gains = finite_horizon_lqr(sys, q, r, qf, horizon);
        Vector x0(4);
        x0 << 5.0, 5.0, 0.0, 0.0;
        std::vector<Vector> inputs;
        Vector x = x0;
        for (int t = 0; t < horizon; ++t) {
            inputs.push_back(-gains[t] * x);
            x = sys.A * x + sys.B * inputs.back();
        }
        Trajectory nominal = rollout(sys, x0, inputs);
        Vector source(2);
        source << 2.0, -0.5;
        QuadraticRadiusModel model(0.08, source, 0.1, sys.C);
        model.set_lipschitz_ball_radius(4.0);
        return {std::move(sys), std::move(nominal), std::move(model), 0.5};
    }

    DeviationProblem problem(double gamma) const {
        DeviationProblem p;
        p.sys = sys;
        p.model = &model;
        p.nominal = nominal;
        p.gamma = gamma;
        p.eps = eps;
        return p;
    }
};

struct Feasibility {
    double max_step_deviation = 0.0;
    double terminal_deviation = 0.0;
    double dynamics_residual = 0.0;
};

Feasibility feasibility_of(const LightScenario& sc, const Trajectory& traj) {
    Feasibility f;
    f.dynamics_residual = traj.dynamics_residual(sc.sys);
    for (std::size_t t = 1; t < traj.states.size(); ++t) {
        f.max_step_deviation = std::max(
            f.max_step_deviation, (traj.states[t] - sc.nominal.states[t]).norm());
    }
    f.terminal_deviation = (traj.states.back() - sc.nominal.states.back()).norm();
    return f;
}

}  // namespace

TEST_CASE("gamma = 0 returns the nominal trajectory exactly") {
    const LightScenario sc = LightScenario::make(10, 0.25);
    const DeviationResult res = solve_deviation(sc.problem(0.0));
    CHECK(res.status == SolveStatus::converged);
    REQUIRE(res.trajectory.states.size() == sc.nominal.states.size());
    for (std::size_t t = 0; t < sc.nominal.states.size(); ++t) {
        CHECK((res.trajectory.states[t] - sc.nominal.states[t]).norm() == 0.0);
    }
}

TEST_CASE("flat objective returns a point with the nominal objective") {
    // Constant radius: the bound does not depend on the deviation at all.
    LightScenario sc = LightScenario::make(8, 0.25);
    QuadraticRadiusModel flat(0.0, Vector::Zero(2), 0.3, sc.sys.C);
    flat.set_lipschitz_ball_radius(4.0);
    DeviationProblem p = sc.problem(1.5);
    p.model = &flat;
    const DeviationResult res = solve_deviation(p);
    CHECK(res.status == SolveStatus::converged);
    ObservabilityEvaluator eval(sc.sys, flat, sc.nominal.horizon(), sc.eps);
    CHECK(std::abs(res.report.value - eval.value(sc.nominal.states)) <= 1e-9);
    const Feasibility f = feasibility_of(sc, res.trajectory);
    CHECK(f.max_step_deviation <= 1.5 + 1e-8);
    CHECK(f.terminal_deviation <= 1e-8);
}

TEST_CASE("solution is feasible and improves the bound") {
    const LightScenario sc = LightScenario::make(12, 0.25);
    const DeviationResult res = solve_deviation(sc.problem(2.0));
    const Feasibility f = feasibility_of(sc, res.trajectory);
    CHECK(f.max_step_deviation <= 2.0 + 1e-8);
    CHECK(f.terminal_deviation <= 1e-8);
    CHECK(f.dynamics_residual <= 1e-8);

    ObservabilityEvaluator eval(sc.sys, sc.model, sc.nominal.horizon(), sc.eps);
    const double nominal_value = eval.value(sc.nominal.states);
    CHECK(res.report.value >= nominal_value - 1e-9);
    // The light source is reachable enough that the bound strictly improves.
    CHECK(res.report.value > nominal_value + 1e-3);
}

TEST_CASE("objective history is monotone non-decreasing") {
    const LightScenario sc = LightScenario::make(12, 0.25);
    const DeviationResult res = solve_deviation(sc.problem(1.0));
    REQUIRE(res.objective_history.size() >= 2);
    for (std::size_t i = 1; i < res.objective_history.size(); ++i) {
        CHECK(res.objective_history[i] >= res.objective_history[i - 1]);
    }
}

TEST_CASE("objective grows with the exploration budget") {
    const LightScenario sc = LightScenario::make(10, 0.25);
    double previous = -std::numeric_limits<double>::infinity();
    for (double gamma : {0.5, 1.0, 2.0, 4.0}) {
        const DeviationResult res = solve_deviation(sc.problem(gamma));
        CHECK(res.report.value >= previous - 1e-6);
        previous = res.report.value;
    }
}

TEST_CASE("solver matches a coarse grid search over 3-segment deviations") {
    const LightScenario sc = LightScenario::make(10, 0.25);
    const double gamma = 2.0;
    const DeviationResult res = solve_deviation(sc.problem(gamma));

    // Independent oracle: search a 3-dimensional family of feasible
    // deviations built from random terminal-feasible input directions.
    const int N = sc.nominal.horizon();
    const int nx = sc.sys.nx();
    const int nu = sc.sys.nu();
    Matrix input_map = Matrix::Zero(N * nx, N * nu);
    Matrix power = sc.sys.B;
    std::vector<Matrix> powers = {sc.sys.B};
    for (int i = 1; i < N; ++i) powers.push_back(sc.sys.A * powers.back());
    for (int k = 0; k < N; ++k) {
        for (int j = 0; j <= k; ++j) {
            input_map.block(k * nx, j * nu, nx, nu) = powers[k - j];
        }
    }
    Eigen::FullPivLU<Matrix> lu(input_map.bottomRows(nx));
    const Matrix kernel = lu.kernel();
    REQUIRE(kernel.cols() >= 3);

    Rng rng(99);
    std::vector<Vector> dirs;
    for (int i = 0; i < 3; ++i) {
        Vector xi = kernel * rnd::gaussian_vector(rng, static_cast<int>(kernel.cols()));
        Vector eta = input_map * xi;
        double max_norm = 0.0;
        for (int k = 0; k < N; ++k) {
            max_norm = std::max(max_norm, eta.segment(k * nx, nx).norm());
        }
        REQUIRE(max_norm > 1e-12);
        dirs.push_back(eta / max_norm);
    }

    ObservabilityEvaluator eval(sc.sys, sc.model, N, sc.eps);
    double best = eval.value(sc.nominal.states);
    const std::vector<double> grid = {-1.0, -0.5, 0.0, 0.5, 1.0};
    for (double c0 : grid) {
        for (double c1 : grid) {
            for (double c2 : grid) {
                Vector eta = gamma * (c0 * dirs[0] + c1 * dirs[1] + c2 * dirs[2]);
                double max_norm = 0.0;
                for (int k = 0; k < N; ++k) {
                    max_norm = std::max(max_norm, eta.segment(k * nx, nx).norm());
                }
                if (max_norm > gamma) eta *= gamma / max_norm;
                std::vector<Vector> states = sc.nominal.states;
                for (int k = 0; k < N; ++k) states[k + 1] += eta.segment(k * nx, nx);
                best = std::max(best, eval.value(states));
            }
        }
    }
    CHECK(res.report.value >= best - 0.05 * std::abs(best));
}

TEST_CASE("warm start cannot hurt") {
    const LightScenario sc = LightScenario::make(10, 0.25);
    const DeviationResult cold = solve_deviation(sc.problem(1.0));
    DeviationOptions opts;
    std::vector<Vector> eta;
    for (std::size_t t = 1; t < cold.trajectory.states.size(); ++t) {
        eta.push_back(cold.trajectory.states[t] - sc.nominal.states[t]);
    }
    opts.initial_deviation = eta;
    const DeviationResult warm = solve_deviation(sc.problem(2.0), opts);
    CHECK(warm.report.value >= cold.report.value - 1e-9);
}

TEST_CASE("invalid problems are rejected") {
    LightScenario sc = LightScenario::make(5, 0.25);
    DeviationProblem p = sc.problem(-1.0);
    CHECK_THROWS_AS(solve_deviation(p), std::invalid_argument);
    p = sc.problem(1.0);
    p.model = nullptr;
    CHECK_THROWS_AS(solve_deviation(p), std::invalid_argument);
    p = sc.problem(1.0);
    p.nominal.states[3][0] += 0.1;  // break consistency
    CHECK_THROWS_AS(solve_deviation(p), std::invalid_argument);
}
