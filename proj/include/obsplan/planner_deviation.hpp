#pragma once

#include <optional>
#include <vector>

#include "obsplan/dynamics.hpp"
#include "obsplan/observability.hpp"
#include "obsplan/types.hpp"
#include "obsplan/uncertainty.hpp"

namespace obsplan {

enum class SolveStatus { converged, max_iterations };

/// Maximize the observability lower bound over deviations from a nominal
/// trajectory: eta_{k+1} = A eta_k + B xi_k, eta_0 = 0, ||eta_k|| <= gamma,
/// eta_N = 0.
struct DeviationProblem {
    LtiSystem sys;
    const UncertaintyModel* model = nullptr;
    Trajectory nominal;
    double gamma = 0.0;
    double eps = 0.0;

    void validate() const;
};

struct DeviationOptions {
    int max_iters = 300;
    /// Relative objective-change stopping threshold.
    double tol = 1e-9;
    double initial_step = 1.0;
    int max_backtracks = 45;
    int dykstra_max_iters = 5000;
    double dykstra_tol = 1e-11;
    /// Optional warm start: eta_1..eta_N stacked per step (projected onto the
    /// feasible set before use).
    std::optional<std::vector<Vector>> initial_deviation;
};

struct DeviationResult {
    Trajectory trajectory;
    ObservabilityReport report;
    SolveStatus status = SolveStatus::converged;
    /// Objective value of each accepted iterate, starting from the nominal.
    std::vector<double> objective_history;
    int iterations = 0;
};

DeviationResult solve_deviation(const DeviationProblem& problem,
                                const DeviationOptions& opts = {});

}  // namespace obsplan
