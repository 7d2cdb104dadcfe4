#include "obsplan/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace obsplan {

namespace {

/// Deterministic quasi-uniform directions used by the sampled ball maximum.
std::vector<Vector> ball_directions(int dim, int count) {
    Rng rng(0x6f62735031ULL + static_cast<std::uint64_t>(dim));
    std::vector<Vector> dirs;
    dirs.reserve(count);
    for (int i = 0; i < count; ++i) dirs.push_back(rnd::unit_vector(rng, dim));
    return dirs;
}

constexpr int kBallDirections = 256;

}  // namespace

Ellipsoid UncertaintyModel::shape_at(const Vector& x) const {
    const Matrix& C = output_matrix();
    const double lambda = radius_at(x);
    const int ny = static_cast<int>(C.rows());
    return Ellipsoid(C * x, (lambda * lambda) * Matrix::Identity(ny, ny));
}

void UncertaintyModel::set_lipschitz_ball_radius(double r) {
    if (!(r > 0.0)) throw std::invalid_argument("lipschitz ball radius must be positive");
    lipschitz_ball_radius_ = r;
}

double UncertaintyModel::local_lipschitz(const Vector& x, double r) const {
    if (!(r > 0.0)) throw std::invalid_argument("local_lipschitz: r must be positive");
    double best = radius_at(x);
    for (const Vector& d : ball_directions(static_cast<int>(x.size()), kBallDirections)) {
        best = std::max(best, radius_at(x + r * d));
    }
    return 2.0 * best / r;
}

Vector UncertaintyModel::lipschitz_gradient(const Vector& x, double r) const {
    if (!(r > 0.0)) throw std::invalid_argument("lipschitz_gradient: r must be positive");
    double best = -std::numeric_limits<double>::infinity();
    Vector active = x;
    for (const Vector& d : ball_directions(static_cast<int>(x.size()), kBallDirections)) {
        const Vector probe = x + r * d;
        const double v = radius_at(probe);
        if (v > best) {
            best = v;
            active = probe;
        }
    }
    if (radius_at(x) > best) return Vector::Zero(x.size());
    return (2.0 / r) * radius_gradient(active);
}

QuadraticRadiusModel::QuadraticRadiusModel(double gain, Vector source,
                                           double residual_radius,
                                           Matrix output_matrix)
    : gain_(gain),
      source_(std::move(source)),
      residual_radius_(residual_radius),
      C_(std::move(output_matrix)) {
    if (gain_ < 0.0) throw std::invalid_argument("QuadraticRadiusModel: gain must be >= 0");
    if (!(residual_radius_ > 0.0)) {
        throw std::invalid_argument("QuadraticRadiusModel: residual radius must be positive");
    }
    if (source_.size() != C_.rows()) {
        throw std::invalid_argument("QuadraticRadiusModel: source/output dimension mismatch");
    }
    sigma_max_C_ = Eigen::JacobiSVD<Matrix>(C_).singularValues().maxCoeff();
}

double QuadraticRadiusModel::radius_at(const Vector& x) const {
    const Vector d = C_ * x - source_;
    return gain_ * d.squaredNorm() + residual_radius_;
}

Vector QuadraticRadiusModel::radius_gradient(const Vector& x) const {
    return 2.0 * gain_ * (C_.transpose() * (C_ * x - source_));
}

double QuadraticRadiusModel::local_lipschitz(const Vector& x, double r) const {
    if (!(r > 0.0)) throw std::invalid_argument("local_lipschitz: r must be positive");
    const double s = (C_ * x - source_).norm();
    const double reach = s + sigma_max_C_ * r;
    const double m = gain_ * reach * reach + residual_radius_;
    return 2.0 * m / r;
}

Vector QuadraticRadiusModel::lipschitz_gradient(const Vector& x, double r) const {
    if (!(r > 0.0)) throw std::invalid_argument("lipschitz_gradient: r must be positive");
    const Vector d = C_ * x - source_;
    const double s = d.norm();
    if (s < 1e-14) return Vector::Zero(x.size());  // minimum of the cone term
    const double reach = s + sigma_max_C_ * r;
    return (4.0 * gain_ * reach / (r * s)) * (C_.transpose() * d);
}

IlluminationRadiusModel::IlluminationRadiusModel(Vector sun_direction,
                                                 double angle_gain,
                                                 double floor_radius,
                                                 Matrix output_matrix)
    : sun_direction_(std::move(sun_direction)),
      angle_gain_(angle_gain),
      floor_radius_(floor_radius),
      C_(std::move(output_matrix)) {
    const double n = sun_direction_.norm();
    if (n < 1e-12) throw std::invalid_argument("IlluminationRadiusModel: zero sun direction");
    sun_direction_ /= n;
    if (angle_gain_ < 0.0) throw std::invalid_argument("IlluminationRadiusModel: a2 must be >= 0");
    if (!(floor_radius_ > 0.0)) {
        throw std::invalid_argument("IlluminationRadiusModel: a0 must be positive");
    }
    if (C_.rows() != sun_direction_.size()) {
        throw std::invalid_argument("IlluminationRadiusModel: output/sun dimension mismatch");
    }
}

Vector IlluminationRadiusModel::position_of(const Vector& x) const {
    Vector p = C_ * x;
    if (p.norm() <= 1e-6) {
        throw std::domain_error("IlluminationRadiusModel: position too close to the origin");
    }
    return p;
}

double IlluminationRadiusModel::mismatch(const Vector& position) const {
    if (position.norm() <= 1e-6) {
        throw std::domain_error("IlluminationRadiusModel: position too close to the origin");
    }
    return (position.normalized() - sun_direction_).norm();
}

double IlluminationRadiusModel::radius_at(const Vector& x) const {
    const double s = mismatch(position_of(x));
    return angle_gain_ * s * s + floor_radius_;
}

Vector IlluminationRadiusModel::radius_gradient(const Vector& x) const {
    const Vector p = position_of(x);
    const double n = p.norm();
    const Vector u = p / n;
    // s^2 = 2 - 2 u.s_hat, so grad_p = -2 a2 (s_hat - u (u.s_hat)) / n.
    const Vector grad_p = (-2.0 * angle_gain_ / n) *
                          (sun_direction_ - u * u.dot(sun_direction_));
    return C_.transpose() * grad_p;
}

QuadraticEnvelope fit_quadratic_envelope(
    const std::vector<std::pair<double, double>>& samples) {
    if (samples.size() < 3) {
        throw std::invalid_argument("fit_quadratic_envelope: need at least 3 samples");
    }
    // Only the highest sample per distinct feature value can be active.
    std::map<double, double> top;
    for (const auto& [z, y] : samples) {
        auto it = top.find(z);
        if (it == top.end()) {
            top.emplace(z, y);
        } else {
            it->second = std::max(it->second, y);
        }
    }
    if (top.size() < 2) {
        throw std::invalid_argument("fit_quadratic_envelope: features are all equal");
    }

    struct Row {
        Eigen::Vector3d a;
        double rhs;
    };
    std::vector<Row> rows;
    rows.reserve(top.size() + 1);
    for (const auto& [z, y] : top) rows.push_back({{z * z, z, 1.0}, y});
    rows.push_back({{1.0, 0.0, 0.0}, 0.0});  // alpha >= 0

    Eigen::Vector3d cost = Eigen::Vector3d::Zero();
    for (const auto& [z, y] : samples) {
        cost += Eigen::Vector3d(z * z, z, 1.0);
        (void)y;
    }

    double feature_scale = 0.0, value_scale = 0.0;
    for (const auto& [z, y] : top) {
        feature_scale = std::max(feature_scale, std::abs(z));
        value_scale = std::max(value_scale, std::abs(y));
    }
    const double feas_tol = 1e-9 * (1.0 + value_scale);

    // The LP optimum sits at a vertex: enumerate triples of active
    // constraints, keep the feasible vertex with the lowest objective.
    const int m = static_cast<int>(rows.size());
    double best_obj = std::numeric_limits<double>::infinity();
    Eigen::Vector3d best_w = Eigen::Vector3d::Zero();
    bool found = false;
    Eigen::Matrix3d M;
    Eigen::Vector3d rhs;
    for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j) {
            for (int k = j + 1; k < m; ++k) {
                M.row(0) = rows[i].a;
                M.row(1) = rows[j].a;
                M.row(2) = rows[k].a;
                rhs << rows[i].rhs, rows[j].rhs, rows[k].rhs;
                Eigen::FullPivLU<Eigen::Matrix3d> lu(M);
                lu.setThreshold(1e-12);
                if (lu.rank() < 3) continue;
                const Eigen::Vector3d w = lu.solve(rhs);
                if (!w.allFinite()) continue;
                if (w[0] < -feas_tol) continue;
                bool feasible = true;
                for (const Row& row : rows) {
                    if (row.a.dot(w) < row.rhs - feas_tol) {
                        feasible = false;
                        break;
                    }
                }
                if (!feasible) continue;
                const double obj = cost.dot(w);
                if (!found || obj < best_obj) {
                    best_obj = obj;
                    best_w = w;
                    found = true;
                }
            }
        }
    }
    if (!found) {
        std::ostringstream msg;
        msg << "fit_quadratic_envelope: no feasible vertex found (distinct features="
            << top.size() << ", feature scale=" << feature_scale
            << ", value scale=" << value_scale << ")";
        throw std::runtime_error(msg.str());
    }

    QuadraticEnvelope env{std::max(0.0, best_w[0]), best_w[1], best_w[2]};
    // Lift the constant term by any residual violation so the envelope
    // property holds exactly on the fitted samples.
    double worst = 0.0;
    for (const auto& [z, y] : top) worst = std::max(worst, y - env.value(z));
    env.gamma += worst;
    return env;
}

}  // namespace obsplan
