#pragma once

#include <vector>

#include "obsplan/types.hpp"

namespace obsplan {

/// Discrete-time LTI system x+ = A x + B u, y = C x, with the discretization
/// step it was built for.
struct LtiSystem {
    Matrix A;
    Matrix B;
    Matrix C;
    double dt = 0.0;

    int nx() const { return static_cast<int>(A.rows()); }
    int nu() const { return static_cast<int>(B.cols()); }
    int ny() const { return static_cast<int>(C.rows()); }

    void validate() const;
};

/// Paired state/input sequences; states has one more entry than inputs.
/// `dynamically_consistent` marks sequences produced by an exact rollout;
/// planners may carry tentative sequences with the flag cleared.
struct Trajectory {
    std::vector<Vector> states;
    std::vector<Vector> inputs;
    bool dynamically_consistent = false;

    int horizon() const { return static_cast<int>(inputs.size()); }
    void validate() const;
    /// Max residual ||x_{t+1} - A x_t - B u_t|| over the horizon.
    double dynamics_residual(const LtiSystem& sys) const;
};

Trajectory rollout(const LtiSystem& sys, const Vector& x0,
                   const std::vector<Vector>& inputs);

/// Planar double integrator, state [px, py, vx, vy], acceleration inputs,
/// position-only output. Exact zero-order-hold discretization.
LtiSystem double_integrator_2d(double dt);

/// Mean motion sqrt(mu / a^3) of a circular orbit.
double mean_motion(double mu, double semi_major_axis);

/// Clohessy-Wiltshire relative dynamics in the target's Hill frame, state
/// [x, y, z, vx, vy, vz], acceleration inputs, position-only output.
/// Discretized with the closed-form CW state-transition matrix (exact ZOH).
LtiSystem cw_system(double n, double dt);

/// Backward Riccati recursion for the finite-horizon regulator; returns the
/// gain sequence K_0..K_{T-1} with u_t = -K_t x_t optimal.
std::vector<Matrix> finite_horizon_lqr(const LtiSystem& sys, const Matrix& Q,
                                       const Matrix& R, const Matrix& Qf, int T);

/// Quadratic tracking cost sum_k (x_k-g)' Q (x_k-g) + u_k' R u_k over stages
/// 0..T-1 plus terminal (x_T-g)' Qf (x_T-g).
double quadratic_cost(const Trajectory& traj, const Matrix& Q, const Matrix& R,
                      const Matrix& Qf, const Vector& goal);

}  // namespace obsplan
