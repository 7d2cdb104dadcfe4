#pragma once

#include <utility>
#include <vector>

#include "obsplan/geometry.hpp"
#include "obsplan/types.hpp"

namespace obsplan {

/// State-dependent output uncertainty: every state maps to an ellipsoid of
/// possible outputs centered on the nominal measurement C x, with scalar
/// radius map x -> Lambda(x) and a local Lipschitz bound on it.
class UncertaintyModel {
  public:
    virtual ~UncertaintyModel() = default;

    virtual double radius_at(const Vector& x) const = 0;
    virtual Vector radius_gradient(const Vector& x) const = 0;
    virtual const Matrix& output_matrix() const = 0;

    /// Output ellipsoid at x: ball of radius radius_at(x) around C x.
    Ellipsoid shape_at(const Vector& x) const;

    /// Local Lipschitz bound L(x) = 2 M(x, r) / r with M the maximum of the
    /// radius map over the ball B_r(x). The default maximizes over 256
    /// deterministic quasi-uniform boundary directions; models with a
    /// closed-form maximum override this.
    virtual double local_lipschitz(const Vector& x, double r) const;
    double local_lipschitz(const Vector& x) const {
        return local_lipschitz(x, lipschitz_ball_radius_);
    }

    /// Gradient of local_lipschitz in x at the configured ball radius. The
    /// default differentiates the sampled maximum through its active
    /// direction.
    virtual Vector lipschitz_gradient(const Vector& x, double r) const;
    Vector lipschitz_gradient(const Vector& x) const {
        return lipschitz_gradient(x, lipschitz_ball_radius_);
    }

    double lipschitz_ball_radius() const { return lipschitz_ball_radius_; }
    void set_lipschitz_ball_radius(double r);

  protected:
    double lipschitz_ball_radius_ = 1.0;
};

/// Light-intensity style model: Lambda(x) = K ||C x - y_s||^2 + r0, convex in
/// the state, minimized where the output sits on the source y_s.
class QuadraticRadiusModel final : public UncertaintyModel {
  public:
    QuadraticRadiusModel(double gain, Vector source, double residual_radius,
                         Matrix output_matrix);

    double radius_at(const Vector& x) const override;
    Vector radius_gradient(const Vector& x) const override;
    const Matrix& output_matrix() const override { return C_; }

    using UncertaintyModel::local_lipschitz;
    using UncertaintyModel::lipschitz_gradient;
    // M(x, r) = K (||Cx - y_s|| + sigma_max(C) r)^2 + r0, a closed-form bound
    // on the ball maximum.
    double local_lipschitz(const Vector& x, double r) const override;
    Vector lipschitz_gradient(const Vector& x, double r) const override;

    double gain() const { return gain_; }
    const Vector& source() const { return source_; }
    double residual_radius() const { return residual_radius_; }

  private:
    double gain_;
    Vector source_;
    double residual_radius_;
    Matrix C_;
    double sigma_max_C_;
};

/// Vision/illumination model: Lambda(x) = a2 * s(p)^2 + a0 where p = C x is
/// the relative position and s(p) = ||p/||p|| - sun_dir|| is the chordal
/// mismatch between the viewing direction and the sun direction.
class IlluminationRadiusModel final : public UncertaintyModel {
  public:
    IlluminationRadiusModel(Vector sun_direction, double angle_gain,
                            double floor_radius, Matrix output_matrix);

    double radius_at(const Vector& x) const override;
    Vector radius_gradient(const Vector& x) const override;
    const Matrix& output_matrix() const override { return C_; }

    /// Chordal illumination mismatch s(p) for a position vector.
    double mismatch(const Vector& position) const;

    const Vector& sun_direction() const { return sun_direction_; }
    double angle_gain() const { return angle_gain_; }
    double floor_radius() const { return floor_radius_; }

  private:
    Vector position_of(const Vector& x) const;

    Vector sun_direction_;
    double angle_gain_;
    double floor_radius_;
    Matrix C_;
};

/// Convex quadratic upper envelope g(z) = alpha z^2 + beta z + gamma with
/// alpha >= 0, fitted to dominate a sample set.
struct QuadraticEnvelope {
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;

    double value(double z) const { return (alpha * z + beta) * z + gamma; }
};

/// Fit the tightest quadratic envelope: minimize sum_i (g(z_i) - y_i) subject
/// to g(z_i) >= y_i for all i and alpha >= 0. Solved exactly by vertex
/// enumeration of the three-variable linear program.
QuadraticEnvelope fit_quadratic_envelope(
    const std::vector<std::pair<double, double>>& samples);

}  // namespace obsplan
