#include "obsplan/geometry.hpp"

#include <algorithm>
#include <stdexcept>

namespace obsplan {

namespace {
constexpr double kSymmetryTol = 1e-12;
constexpr double kContainsTol = 1e-12;
}  // namespace

Ellipsoid::Ellipsoid(Vector center, Matrix shape)
    : center_(std::move(center)), shape_(std::move(shape)) {
    const auto n = center_.size();
    if (shape_.rows() != n || shape_.cols() != n) {
        throw std::invalid_argument("Ellipsoid: center/shape dimension mismatch");
    }
    const double scale = 1.0 + shape_.cwiseAbs().maxCoeff();
    if ((shape_ - shape_.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol * scale) {
        throw std::invalid_argument("Ellipsoid: shape matrix is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (shape_ + shape_.transpose()));
    if (solver.info() != Eigen::Success) {
        throw std::invalid_argument("Ellipsoid: eigendecomposition failed");
    }
    eigenvalues_ = solver.eigenvalues();
    eigenvectors_ = solver.eigenvectors();
    if (eigenvalues_.minCoeff() <= 0.0) {
        throw std::invalid_argument("Ellipsoid: shape matrix is not positive definite");
    }
    sqrt_eigenvalues_ = eigenvalues_.cwiseSqrt();
    radius_ = sqrt_eigenvalues_.maxCoeff();
}

bool Ellipsoid::contains(const Vector& p) const {
    if (p.size() != center_.size()) {
        throw std::invalid_argument("Ellipsoid::contains: dimension mismatch");
    }
    const Vector u = eigenvectors_.transpose() * (p - center_);
    double q = 0.0;
    for (int i = 0; i < u.size(); ++i) q += u[i] * u[i] / eigenvalues_[i];
    return q <= 1.0 + kContainsTol;
}

Vector Ellipsoid::sample_uniform(Rng& rng) const {
    const Vector y = rnd::ball_point(rng, dim());
    return center_ + eigenvectors_ * sqrt_eigenvalues_.cwiseProduct(y);
}

Vector Ellipsoid::sample_boundary(Rng& rng) const {
    const Vector y = rnd::unit_vector(rng, dim());
    return center_ + eigenvectors_ * sqrt_eigenvalues_.cwiseProduct(y);
}

double set_distance_lb(const Ellipsoid& e1, const Ellipsoid& e2) {
    if (e1.dim() != e2.dim()) {
        throw std::invalid_argument("set_distance_lb: dimension mismatch");
    }
    const double gap = (e1.center() - e2.center()).norm() - e1.radius() - e2.radius();
    return std::max(0.0, gap);
}

double set_distance_sampled(const Ellipsoid& e1, const Ellipsoid& e2, int n,
                            Rng& rng) {
    if (e1.dim() != e2.dim()) {
        throw std::invalid_argument("set_distance_sampled: dimension mismatch");
    }
    if (n < 1) {
        throw std::invalid_argument("set_distance_sampled: need n >= 1");
    }
    const int d = e1.dim();
    Matrix p1(n, d), p2(n, d);
    for (int i = 0; i < n; ++i) {
        // Alternate boundary and interior samples so both disjoint and
        // overlapping configurations are probed.
        const bool boundary = (i % 2 == 0);
        const Vector a = boundary ? e1.sample_boundary(rng) : e1.sample_uniform(rng);
        const Vector b = boundary ? e2.sample_boundary(rng) : e2.sample_uniform(rng);
        if (e2.contains(a) || e1.contains(b)) {
            return 0.0;  // a common point exists, the infimum is zero
        }
        p1.row(i) = a.transpose();
        p2.row(i) = b.transpose();
    }
    const Vector sq1 = p1.rowwise().squaredNorm();
    const Vector sq2 = p2.rowwise().squaredNorm();
    Matrix cross = p1 * p2.transpose();
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double d2 = sq1[i] + sq2[j] - 2.0 * cross(i, j);
            if (d2 < best) best = d2;
        }
    }
    return std::sqrt(std::max(0.0, best));
}

}  // namespace obsplan
