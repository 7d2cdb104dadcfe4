#pragma once

#include <complex>
#include <vector>

#include "obsplan/dynamics.hpp"
#include "obsplan/types.hpp"
#include "obsplan/uncertainty.hpp"

namespace obsplan {

/// Luenberger observer gain; the update is xhat+ = A xhat + B u + L (y - C xhat)
/// and stability means spectral_radius(A - L C) < 1.
struct Observer {
    Matrix gain;
};

double spectral_radius(const Matrix& m);

/// Rank of the stacked observability matrix [C; CA; ...; CA^{nx-1}].
int observability_matrix_rank(const LtiSystem& sys);

/// Steady-state filtering Riccati design with unit process and measurement
/// weights.
Observer design_observer_riccati(const LtiSystem& sys);

/// Eigenvalue placement for A - L C at the given (conjugate-closed) pole set.
Observer design_observer_poles(const LtiSystem& sys,
                               const std::vector<std::complex<double>>& poles);

struct EstimationStats {
    std::vector<double> mean_error_norm;  // per step, across runs
    std::vector<double> var_error_norm;   // per step, across runs
    std::vector<Vector> state_variance;   // per step, per state component
    /// Mean of var_error_norm over the final quarter of the horizon.
    double converged_variance = 0.0;
    int runs = 0;
};

struct SimulationOptions {
    /// Offset of the true initial state from the reference start.
    Vector initial_offset;
    int threads = 1;
};

/// Closed-loop Monte Carlo evaluation of an observer tracking a reference:
/// measurements are drawn uniformly from the model's output ellipsoid at the
/// true state, the tracker applies u = u_ref - K (xhat - x_ref), and error
/// statistics are aggregated across runs (deterministic for a fixed seed,
/// independent of the thread count).
EstimationStats simulate_closed_loop(const LtiSystem& sys, const UncertaintyModel& model,
                                     const Trajectory& reference, const Observer& observer,
                                     const std::vector<Matrix>& tracker_gains, int runs,
                                     Rng& rng, const SimulationOptions& opts = {});

}  // namespace obsplan
