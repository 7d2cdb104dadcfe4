#pragma once

#include <optional>
#include <vector>

#include "obsplan/dynamics.hpp"
#include "obsplan/geometry.hpp"
#include "obsplan/types.hpp"
#include "obsplan/uncertainty.hpp"

namespace obsplan {

struct ObservabilityStep {
    int t = 0;
    /// Separation term sigma_min(C A^t) * eps; state-independent.
    double t1 = 0.0;
    /// Uncertainty term -sigma_max(A^t) * eps * L(x_t) - 2 Lambda(x_t).
    double t2 = 0.0;
};

struct ObservabilityReport {
    /// Unclamped sum of per-step terms; the concave planning objective.
    double value = 0.0;
    std::vector<ObservabilityStep> per_step;
    double epsilon = 0.0;
    bool positive = false;
    /// Diagnostic with each step clamped at zero, matching the nonnegative
    /// set-distance convention; not used as an objective.
    double clamped_value = 0.0;
};

/// Sum over steps of the closed-form set-distance lower bound between two
/// output tubes of equal length.
double tube_distance(const std::vector<Ellipsoid>& tube1,
                     const std::vector<Ellipsoid>& tube2);

/// The output tube along a state sequence: one uncertainty ellipsoid per step.
std::vector<Ellipsoid> output_tube(const UncertaintyModel& model,
                                   const std::vector<Vector>& states);

/// Shared machinery for the degree-of-observability lower bound: caches the
/// singular values of C A^t and A^t for a fixed horizon and evaluates the
/// bound, its per-step decomposition, and its state gradient on arbitrary
/// state sequences of that length.
class ObservabilityEvaluator {
  public:
    ObservabilityEvaluator(const LtiSystem& sys, const UncertaintyModel& model,
                           int horizon, double eps);

    double value(const std::vector<Vector>& states) const;
    ObservabilityReport report(const std::vector<Vector>& states) const;
    /// d value / d x_t for t = 0..T.
    std::vector<Vector> gradient(const std::vector<Vector>& states) const;

    int horizon() const { return horizon_; }
    double epsilon() const { return eps_; }
    /// Smallest gain sigma_min(C A^t) over the whole state space (zero when
    /// C A^t has a nontrivial null space).
    double sigma_min_cat(int t) const { return sigma_min_cat_[t]; }
    double sigma_max_at(int t) const { return sigma_max_at_[t]; }

  private:
    const LtiSystem* sys_;
    const UncertaintyModel* model_;
    int horizon_;
    double eps_;
    std::vector<double> sigma_min_cat_;
    std::vector<double> sigma_max_at_;
};

/// Closed-form lower bound on the degree of observability along a nominal
/// trajectory:
///   D = sum_t [ sigma_min(C A^t) eps - sigma_max(A^t) eps L(x_t) - 2 Lambda(x_t) ].
/// Per-step terms are left unclamped so the bound stays concave in the state
/// sequence; the report carries a clamped diagnostic alongside.
ObservabilityReport observability_lower_bound(const LtiSystem& sys,
                                              const UncertaintyModel& model,
                                              const Trajectory& nominal,
                                              double eps);

/// Gradient of the bound with respect to each nominal state.
std::vector<Vector> observability_lower_bound_gradient(
    const LtiSystem& sys, const UncertaintyModel& model,
    const Trajectory& nominal, double eps);

/// Brute-force upper bound on the degree of observability: sample initial
/// perturbations on spheres of radius eps*m for each multiplier m, roll out
/// with the nominal input sequence, and take the minimum tube distance to the
/// nominal tube.
double degree_of_observability_sampled(const LtiSystem& sys,
                                       const UncertaintyModel& model,
                                       const Trajectory& nominal, double eps,
                                       int n_samples,
                                       const std::vector<double>& radii_multipliers,
                                       Rng& rng);

/// Smallest eps that would make the lower bound positive along the nominal
/// trajectory, if one exists (the bound is affine in eps).
std::optional<double> suggest_epsilon(const LtiSystem& sys,
                                      const UncertaintyModel& model,
                                      const Trajectory& nominal);

}  // namespace obsplan
