#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "obsplan/dynamics.hpp"
#include "obsplan/observability.hpp"
#include "obsplan/planner_deviation.hpp"
#include "obsplan/solver_kernel.hpp"
#include "obsplan/types.hpp"
#include "obsplan/uncertainty.hpp"

namespace obsplan {

/// Rendezvous trajectory design: quadratic tracking plus fuel cost minus a
/// weighted observability bound, under relative dynamics, a spherical
/// keep-out zone, and per-axis input bounds.
struct RendezvousProblem {
    LtiSystem sys;
    const UncertaintyModel* model = nullptr;
    Vector x0;
    Vector x_goal;  // defaults to the origin when empty
    Matrix Q;
    Matrix R;
    Matrix Qf;  // defaults to Q when empty
    double keepout_radius = 0.0;
    double lambda_obs = 0.0;
    double eps = 1.0;
    int horizon = 0;
    double u_max = 0.0;

    void validate() const;
};

struct ScvxOptions {
    double trust_radius0 = 10.0;
    double trust_shrink = 0.5;
    double trust_grow = 2.0;
    double rho0 = 0.05;
    double rho1 = 0.25;
    double rho2 = 0.7;
    double slack_weight = 1e4;
    int max_iters = 60;
    double convergence_tol = 1e-6;
    double trust_radius_min = 1e-7;
    double trust_radius_max = 1e4;
    /// Keep-out radius inflation absorbing solver tolerances.
    double keepout_margin = 1e-5;
    double qp_tol = 1e-8;
    int qp_max_iters = 200000;
    std::optional<Trajectory> initial_trajectory;
};

struct ScvxIterationLog {
    int iter = 0;
    double nonlinear_cost = 0.0;
    double linearized_cost = 0.0;
    double ratio = 0.0;
    double trust_radius = 0.0;
    double max_slack = 0.0;
    bool accepted = false;
};

struct ScvxReport {
    std::vector<ScvxIterationLog> iterations;
    SolveStatus status = SolveStatus::max_iterations;
    bool converged = false;
    /// Set when iterates went stationary while keep-out slack persisted.
    bool keepout_infeasible = false;
    double final_cost = 0.0;
    int accepted_count = 0;
};

struct ScvxResult {
    Trajectory trajectory;
    ScvxReport report;
    ObservabilityReport observability;
};

/// Supporting halfspace of the keep-out complement at a reference position:
/// a' p >= b with a = p_ref/||p_ref||, b = d. Every point satisfying it has
/// ||p|| >= d.
std::pair<Vector, double> linearize_keepout(const Vector& p_ref, double d);

ScvxResult solve_scvx(const RendezvousProblem& problem, const ScvxOptions& opts = {});

}  // namespace obsplan
