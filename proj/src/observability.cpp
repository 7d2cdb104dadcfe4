#include "obsplan/observability.hpp"

#include <cmath>
#include <stdexcept>

namespace obsplan {

double tube_distance(const std::vector<Ellipsoid>& tube1,
                     const std::vector<Ellipsoid>& tube2) {
    if (tube1.size() != tube2.size()) {
        throw std::invalid_argument("tube_distance: tube length mismatch");
    }
    double total = 0.0;
    for (std::size_t t = 0; t < tube1.size(); ++t) {
        total += set_distance_lb(tube1[t], tube2[t]);
    }
    return total;
}

std::vector<Ellipsoid> output_tube(const UncertaintyModel& model,
                                   const std::vector<Vector>& states) {
    std::vector<Ellipsoid> tube;
    tube.reserve(states.size());
    for (const Vector& x : states) tube.push_back(model.shape_at(x));
    return tube;
}

ObservabilityEvaluator::ObservabilityEvaluator(const LtiSystem& sys,
                                               const UncertaintyModel& model,
                                               int horizon, double eps)
    : sys_(&sys), model_(&model), horizon_(horizon), eps_(eps) {
    if (horizon < 0) throw std::invalid_argument("ObservabilityEvaluator: horizon < 0");
    if (!(eps >= 0.0)) throw std::invalid_argument("ObservabilityEvaluator: eps must be >= 0");
    sigma_min_cat_.reserve(horizon + 1);
    sigma_max_at_.reserve(horizon + 1);
    Matrix at = Matrix::Identity(sys.nx(), sys.nx());
    for (int t = 0; t <= horizon; ++t) {
        const Matrix cat = sys.C * at;
        // Smallest gain over the full state space: sqrt(lambda_min(M' M)).
        // This is zero whenever C A^t loses column rank, which keeps the
        // bound below the sampled oracle for flat output maps.
        Eigen::SelfAdjointEigenSolver<Matrix> gram(cat.transpose() * cat);
        sigma_min_cat_.push_back(std::sqrt(std::max(0.0, gram.eigenvalues().minCoeff())));
        sigma_max_at_.push_back(Eigen::JacobiSVD<Matrix>(at).singularValues().maxCoeff());
        at = sys.A * at;
    }
}

double ObservabilityEvaluator::value(const std::vector<Vector>& states) const {
    if (static_cast<int>(states.size()) != horizon_ + 1) {
        throw std::invalid_argument("ObservabilityEvaluator: state sequence length mismatch");
    }
    double total = 0.0;
    for (int t = 0; t <= horizon_; ++t) {
        total += sigma_min_cat_[t] * eps_ -
                 sigma_max_at_[t] * eps_ * model_->local_lipschitz(states[t]) -
                 2.0 * model_->radius_at(states[t]);
    }
    return total;
}

ObservabilityReport ObservabilityEvaluator::report(
    const std::vector<Vector>& states) const {
    if (static_cast<int>(states.size()) != horizon_ + 1) {
        throw std::invalid_argument("ObservabilityEvaluator: state sequence length mismatch");
    }
    ObservabilityReport rep;
    rep.epsilon = eps_;
    rep.per_step.reserve(horizon_ + 1);
    for (int t = 0; t <= horizon_; ++t) {
        ObservabilityStep step;
        step.t = t;
        step.t1 = sigma_min_cat_[t] * eps_;
        step.t2 = -sigma_max_at_[t] * eps_ * model_->local_lipschitz(states[t]) -
                  2.0 * model_->radius_at(states[t]);
        rep.value += step.t1 + step.t2;
        rep.clamped_value += std::max(0.0, step.t1 + step.t2);
        rep.per_step.push_back(step);
    }
    rep.positive = rep.value > 0.0;
    return rep;
}

std::vector<Vector> ObservabilityEvaluator::gradient(
    const std::vector<Vector>& states) const {
    if (static_cast<int>(states.size()) != horizon_ + 1) {
        throw std::invalid_argument("ObservabilityEvaluator: state sequence length mismatch");
    }
    std::vector<Vector> grads;
    grads.reserve(horizon_ + 1);
    for (int t = 0; t <= horizon_; ++t) {
        grads.push_back(-sigma_max_at_[t] * eps_ * model_->lipschitz_gradient(states[t]) -
                        2.0 * model_->radius_gradient(states[t]));
    }
    return grads;
}

namespace {

void check_nominal(const LtiSystem& sys, const Trajectory& nominal) {
    nominal.validate();
    if (nominal.dynamics_residual(sys) > 1e-9) {
        throw std::invalid_argument("nominal trajectory is not dynamically consistent");
    }
}

}  // namespace

ObservabilityReport observability_lower_bound(const LtiSystem& sys,
                                              const UncertaintyModel& model,
                                              const Trajectory& nominal,
                                              double eps) {
    if (!(eps >= 0.0)) throw std::invalid_argument("observability_lower_bound: eps must be >= 0");
    check_nominal(sys, nominal);
    ObservabilityEvaluator eval(sys, model, nominal.horizon(), eps);
    return eval.report(nominal.states);
}

std::vector<Vector> observability_lower_bound_gradient(
    const LtiSystem& sys, const UncertaintyModel& model,
    const Trajectory& nominal, double eps) {
    if (!(eps > 0.0)) {
        throw std::invalid_argument("observability_lower_bound_gradient: eps must be > 0");
    }
    check_nominal(sys, nominal);
    ObservabilityEvaluator eval(sys, model, nominal.horizon(), eps);
    return eval.gradient(nominal.states);
}

double degree_of_observability_sampled(const LtiSystem& sys,
                                       const UncertaintyModel& model,
                                       const Trajectory& nominal, double eps,
                                       int n_samples,
                                       const std::vector<double>& radii_multipliers,
                                       Rng& rng) {
    if (n_samples < 1) {
        throw std::invalid_argument("degree_of_observability_sampled: need n_samples >= 1");
    }
    for (double m : radii_multipliers) {
        if (m < 1.0) {
            throw std::invalid_argument(
                "degree_of_observability_sampled: multipliers must be >= 1");
        }
    }
    check_nominal(sys, nominal);

    const int T = nominal.horizon();
    std::vector<Vector> nominal_output(T + 1);
    std::vector<double> nominal_radius(T + 1);
    for (int t = 0; t <= T; ++t) {
        nominal_output[t] = sys.C * nominal.states[t];
        nominal_radius[t] = model.radius_at(nominal.states[t]);
    }
    double best = std::numeric_limits<double>::infinity();
    std::vector<Vector> perturbed(T + 1);
    for (int i = 0; i < n_samples; ++i) {
        // One direction per sample, reused across multipliers, keeps the
        // sample set nested as n grows.
        const Vector dir = rnd::unit_vector(rng, sys.nx());
        for (double mult : radii_multipliers) {
            perturbed[0] = nominal.states[0] + (eps * mult) * dir;
            for (int t = 0; t < T; ++t) {
                perturbed[t + 1] = sys.A * perturbed[t] + sys.B * nominal.inputs[t];
            }
            double dist = 0.0;
            for (int t = 0; t <= T; ++t) {
                const double gap = (sys.C * perturbed[t] - nominal_output[t]).norm() -
                                   model.radius_at(perturbed[t]) - nominal_radius[t];
                dist += std::max(0.0, gap);
            }
            if (dist < best) best = dist;
        }
    }
    return best;
}

std::optional<double> suggest_epsilon(const LtiSystem& sys,
                                      const UncertaintyModel& model,
                                      const Trajectory& nominal) {
    check_nominal(sys, nominal);
    ObservabilityEvaluator eval(sys, model, nominal.horizon(), 1.0);
    double slope = 0.0;
    double offset = 0.0;
    for (int t = 0; t <= nominal.horizon(); ++t) {
        slope += eval.sigma_min_cat(t) -
                 eval.sigma_max_at(t) * model.local_lipschitz(nominal.states[t]);
        offset += 2.0 * model.radius_at(nominal.states[t]);
    }
    if (slope <= 0.0) return std::nullopt;
    return offset / slope * (1.0 + 1e-9);
}

}  // namespace obsplan
