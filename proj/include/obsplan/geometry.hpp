#pragma once

#include <vector>

#include "obsplan/types.hpp"

namespace obsplan {

/// Ellipsoid { x : (x - c)^T Q^{-1} (x - c) <= 1 } with Q symmetric positive
/// definite. The eigendecomposition of Q is computed once at construction and
/// reused by all queries.
class Ellipsoid {
  public:
    Ellipsoid(Vector center, Matrix shape);

    int dim() const { return static_cast<int>(center_.size()); }
    const Vector& center() const { return center_; }
    const Matrix& shape() const { return shape_; }

    /// Maximum Euclidean distance from the center to any member point,
    /// sqrt(lambda_max(Q)).
    double radius() const { return radius_; }

    /// Membership test with a 1e-12 slack on the quadratic form.
    bool contains(const Vector& p) const;

    /// Uniform sample over the ellipsoid volume.
    Vector sample_uniform(Rng& rng) const;

    /// Sample on the boundary surface (not uniform in surface measure; the
    /// image of a uniform sphere direction under Q^{1/2}).
    Vector sample_boundary(Rng& rng) const;

  private:
    Vector center_;
    Matrix shape_;
    Vector eigenvalues_;   // ascending
    Matrix eigenvectors_;  // columns
    Vector sqrt_eigenvalues_;
    double radius_;
};

/// Closed-form lower bound on the set distance between two ellipsoids:
/// max{0, ||c1 - c2|| - radius(e1) - radius(e2)}.
double set_distance_lb(const Ellipsoid& e1, const Ellipsoid& e2);

/// Sampling upper bound on the set distance: minimum pairwise distance over
/// n boundary/interior samples from each set. Returns exactly zero when a
/// sample of one set lies inside the other (the sets provably intersect).
double set_distance_sampled(const Ellipsoid& e1, const Ellipsoid& e2, int n,
                            Rng& rng);

}  // namespace obsplan
