#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "obsplan/planner_scvx.hpp"

using namespace obsplan;

namespace {

/// Desk-scale rendezvous instance on the target's V-bar with the sun along
/// the radial axis.
struct Rendezvous {
    LtiSystem sys;
    IlluminationRadiusModel model;
    RendezvousProblem problem;

    static Rendezvous make(double lambda_obs, bool crossing) {
        const double n = mean_motion(3.986004418e14, 6.778e6);
        LtiSystem sys = cw_system(n, 20.0);
        Vector sun(3);
        sun << 1.0, 0.0, 0.0;
        IlluminationRadiusModel model(sun, 1.0, 0.1, sys.C);
        model.set_lipschitz_ball_radius(5.0);

        RendezvousProblem p;
        p.sys = sys;
        p.x0 = Vector::Zero(6);
        p.x0[1] = -30.0;
        p.x_goal = Vector::Zero(6);
        // A crossing goal forces the path through the keep-out ball; the
        // same-side goal keeps the constraint inactive.
        p.x_goal[1] = crossing ? 15.0 : -10.0;
        p.Q = 0.05 * Matrix::Identity(6, 6);
        p.R = 10.0 * Matrix::Identity(3, 3);
        p.Qf = 10.0 * Matrix::Identity(6, 6);
        p.keepout_radius = crossing ? 5.0 : 0.0;
        p.lambda_obs = lambda_obs;
        p.eps = 1.0;
        p.horizon = 30;
        p.u_max = crossing ? 0.05 : 0.15;
        Rendezvous r{std::move(sys), std::move(model), std::move(p)};
        r.problem.model = &r.model;
        return r;
    }
};

double min_position_norm(const LtiSystem& sys, const Trajectory& traj) {
    double worst = std::numeric_limits<double>::infinity();
    for (const Vector& x : traj.states) {
        worst = std::min(worst, (sys.C * x).norm());
    }
    return worst;
}

}  // namespace

TEST_CASE("keep-out linearization is a supporting halfspace") {
    Vector p_ref(3);
    p_ref << 10.0, 0.0, 0.0;
    const auto [a, b] = linearize_keepout(p_ref, 5.0);
    CHECK((a - Vector::Unit(3, 0)).norm() < 1e-12);
    CHECK(b == 5.0);
    CHECK(a.dot(p_ref) >= 5.0);  // reference itself is feasible iff outside

    Vector close(3);
    close << 1.0, 2.0, -1.0;
    const auto [a2, b2] = linearize_keepout(close, 5.0);
    CHECK(a2.dot(close) < b2);  // inside the zone: infeasible for its own halfspace

    Rng rng(3);
    for (int i = 0; i < 10000; ++i) {
        const Vector p = 20.0 * rnd::gaussian_vector(rng, 3);
        if (a2.dot(p) >= b2) CHECK(p.norm() >= 5.0 - 1e-12);
    }
    CHECK_THROWS_AS(linearize_keepout(Vector::Zero(3), 1.0), std::invalid_argument);
}

TEST_CASE("with lambda 0 and inactive keep-out the cost matches LQ tracking") {
    Rendezvous r = Rendezvous::make(0.0, false);
    const ScvxResult res = solve_scvx(r.problem);
    CHECK(res.report.converged);

    const auto gains = finite_horizon_lqr(r.problem.sys, r.problem.Q, r.problem.R,
                                          r.problem.Qf, r.problem.horizon);
    std::vector<Vector> inputs;
    Vector x = r.problem.x0;
    for (int k = 0; k < r.problem.horizon; ++k) {
        inputs.push_back(-gains[k] * (x - r.problem.x_goal));
        x = r.problem.sys.A * x + r.problem.sys.B * inputs.back();
    }
    const Trajectory lqr = rollout(r.problem.sys, r.problem.x0, inputs);
    for (const Vector& u : lqr.inputs) {
        REQUIRE(u.cwiseAbs().maxCoeff() <= r.problem.u_max);  // box must be inactive
    }
    const double lqr_cost =
        quadratic_cost(lqr, r.problem.Q, r.problem.R, r.problem.Qf, r.problem.x_goal);
    const double scvx_cost = quadratic_cost(res.trajectory, r.problem.Q, r.problem.R,
                                            r.problem.Qf, r.problem.x_goal);
    CHECK(std::abs(scvx_cost - lqr_cost) <= 1e-4 * std::abs(lqr_cost));
}

TEST_CASE("already-convex problems converge within two accepted iterations") {
    Rendezvous r = Rendezvous::make(0.0, false);
    ScvxOptions opts;
    // Start away from the optimum so convergence is not a no-op; the trust
    // region is wide enough not to bind for the purely convex problem.
    opts.trust_radius0 = 200.0;
    std::vector<Vector> inputs(r.problem.horizon, Vector::Zero(3));
    opts.initial_trajectory = rollout(r.problem.sys, r.problem.x0, inputs);
    const ScvxResult res = solve_scvx(r.problem, opts);
    CHECK(res.report.converged);
    CHECK(res.report.accepted_count <= 2);
}

TEST_CASE("keep-out zone is honored on a crossing transfer") {
    Rendezvous r = Rendezvous::make(0.0, true);
    const ScvxResult res = solve_scvx(r.problem);
    CHECK(res.report.converged);
    REQUIRE(!res.report.iterations.empty());
    CHECK(res.report.iterations.back().max_slack < 1e-6);
    CHECK(min_position_norm(r.problem.sys, res.trajectory) >= 5.0 - 1e-6);
    // The transfer actually skirts the zone rather than staying far away.
    CHECK(min_position_norm(r.problem.sys, res.trajectory) <= 12.0);

    for (const Vector& u : res.trajectory.inputs) {
        CHECK(u.cwiseAbs().maxCoeff() <= r.problem.u_max + 1e-9);
    }
}

TEST_CASE("accepted merit sequence is non-increasing") {
    Rendezvous r = Rendezvous::make(4.0, true);
    const ScvxResult res = solve_scvx(r.problem);
    double last = std::numeric_limits<double>::infinity();
    for (const auto& log : res.report.iterations) {
        if (!log.accepted) continue;
        CHECK(log.nonlinear_cost <= last + 1e-9);
        last = log.nonlinear_cost;
    }
    CHECK(res.report.accepted_count >= 1);
}

TEST_CASE("terminal illumination mismatch decreases with the observability weight") {
    double previous = std::numeric_limits<double>::infinity();
    for (double lambda : {0.0, 4.0, 40.0}) {
        Rendezvous r = Rendezvous::make(lambda, true);
        const ScvxResult res = solve_scvx(r.problem);
        CHECK(res.report.converged);
        const Vector p_final = r.problem.sys.C * res.trajectory.states.back();
        const double mismatch = r.model.mismatch(p_final);
        CHECK(mismatch <= previous + 1e-9);
        previous = mismatch;
    }
}

TEST_CASE("problem validation") {
    Rendezvous r = Rendezvous::make(0.0, true);
    RendezvousProblem bad = r.problem;
    bad.x0.setZero();  // starts inside the keep-out zone
    CHECK_THROWS_AS(solve_scvx(bad), std::invalid_argument);
    bad = r.problem;
    bad.u_max = 0.0;
    CHECK_THROWS_AS(solve_scvx(bad), std::invalid_argument);
}
