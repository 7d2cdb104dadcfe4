#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "obsplan/types.hpp"

namespace obsplan {

/// Euclidean projection onto the ball of given radius around the origin.
Vector project_ball(const Vector& v, double radius);

/// Euclidean projection onto { w : A w = b } for full-row-rank A.
Vector project_affine(const Vector& v, const Matrix& A, const Vector& b);

using Projection = std::function<Vector(const Vector&)>;

struct DykstraResult {
    Vector point;
    bool converged = false;
    int iterations = 0;
};

/// Dykstra's alternating projections onto the intersection of closed convex
/// sets. Unlike plain alternating projections this converges to the exact
/// projection of v, not just a feasible point.
DykstraResult dykstra(const Vector& v, const std::vector<Projection>& projections,
                      int max_iters, double tol);

/// Norm-ball constraint ||D x - center|| <= radius handled by projection
/// inside the splitting iteration.
struct QpBallConstraint {
    Matrix D;
    Vector center;
    double radius = 0.0;
};

/// min 1/2 x'Hx + g'x  s.t.  A_eq x = b_eq,  lb <= A_in x <= ub, and any
/// norm-ball constraints.
struct Qp {
    Matrix H;
    Vector g;
    Matrix A_eq;
    Vector b_eq;
    Matrix A_in;
    Vector lb;
    Vector ub;
    std::vector<QpBallConstraint> balls;

    int num_vars() const { return static_cast<int>(H.rows()); }
    void validate() const;
};

enum class QpStatus { solved, max_iterations, primal_infeasible };

struct QpSolution {
    Vector x;
    /// Duals for the stacked constraint rows [A_eq; A_in; ball rows].
    Vector y;
    QpStatus status = QpStatus::max_iterations;
    int iterations = 0;
    double objective = 0.0;
    double stationarity_residual = 0.0;
    double primal_residual = 0.0;
    double dual_feasibility_residual = 0.0;
    double complementarity_residual = 0.0;
};

struct QpOptions {
    double tol = 1e-7;
    int max_iters = 50000;
    double rho = 0.1;
    double sigma = 1e-6;
    bool polish = true;
    std::optional<Vector> warm_x;
    std::optional<Vector> warm_y;
};

/// Operator-splitting (ADMM) solver for small dense QPs, with an active-set
/// polish step to sharpen box/equality solutions.
QpSolution solve_qp(const Qp& qp, const QpOptions& opts = {});

}  // namespace obsplan
