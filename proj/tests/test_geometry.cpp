#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "obsplan/geometry.hpp"

using namespace obsplan;

namespace {

Matrix random_orthogonal(int n, Rng& rng) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = rnd::gaussian(rng);
    return Eigen::HouseholderQR<Matrix>(m).householderQ();
}

Matrix random_spd(int n, Rng& rng, double cond_cap = 50.0) {
    const Matrix q = random_orthogonal(n, rng);
    Vector eigs(n);
    for (int i = 0; i < n; ++i) eigs[i] = rnd::uniform(rng, 1.0, cond_cap);
    return q * eigs.asDiagonal() * q.transpose();
}

// Independent largest-eigenvalue oracle.
double power_iteration_lambda_max(const Matrix& q, int iters = 20000) {
    Rng rng(7);
    Vector v = rnd::unit_vector(rng, static_cast<int>(q.rows()));
    for (int i = 0; i < iters; ++i) {
        v = q * v;
        v /= v.norm();
    }
    return v.dot(q * v);
}

}  // namespace

TEST_CASE("radius from analytic eigenvalues") {
    Matrix q = Matrix::Zero(2, 2);
    q(0, 0) = 4.0;
    q(1, 1) = 1.0;
    Ellipsoid e(Vector::Zero(2), q);
    CHECK(e.radius() == doctest::Approx(2.0).epsilon(1e-12));

    for (int d : {1, 3, 6}) {
        Ellipsoid ball(Vector::Zero(d), Matrix::Identity(d, d));
        CHECK(ball.radius() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("radius matches power-iteration oracle on random SPD shapes") {
    Rng rng(42);
    for (int trial = 0; trial < 5; ++trial) {
        const Matrix q = random_spd(5, rng);
        Ellipsoid e(Vector::Zero(5), q);
        const double expected = std::sqrt(power_iteration_lambda_max(q));
        CHECK(std::abs(e.radius() - expected) < 1e-9);
    }
}

TEST_CASE("radius is rotation invariant") {
    Rng rng(3);
    const Matrix q = random_spd(4, rng);
    Ellipsoid e(Vector::Zero(4), q);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix r = random_orthogonal(4, rng);
        Ellipsoid rotated(Vector::Zero(4), r * q * r.transpose());
        CHECK(std::abs(rotated.radius() - e.radius()) < 1e-9);
    }
}

TEST_CASE("invalid shapes are rejected") {
    Matrix q(2, 2);
    q << 1.0, 0.0, 0.0, -1.0;
    CHECK_THROWS_AS(Ellipsoid(Vector::Zero(2), q), std::invalid_argument);
    Matrix asym(2, 2);
    asym << 1.0, 0.5, -0.5, 1.0;
    CHECK_THROWS_AS(Ellipsoid(Vector::Zero(2), asym), std::invalid_argument);
    CHECK_THROWS_AS(Ellipsoid(Vector::Zero(3), Matrix::Identity(2, 2)),
                    std::invalid_argument);
}

TEST_CASE("containment at center, boundary, and beyond") {
    Rng rng(11);
    const Matrix q = random_spd(3, rng);
    Vector c(3);
    c << 1.0, -2.0, 0.5;
    Ellipsoid e(c, q);
    CHECK(e.contains(c));

    Eigen::SelfAdjointEigenSolver<Matrix> es(q);
    const Vector axis = es.eigenvectors().col(2);  // eigenvector of lambda_max
    CHECK(e.contains(c + e.radius() * axis));
    CHECK_FALSE(e.contains(c + 1.01 * e.radius() * axis));
    CHECK_THROWS_AS(e.contains(Vector::Zero(2)), std::invalid_argument);
}

TEST_CASE("uniform sampling: containment, mean, determinism") {
    Ellipsoid ball(Vector::Zero(2), Matrix::Identity(2, 2));
    Rng rng(123);
    Vector mean = Vector::Zero(2);
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const Vector p = ball.sample_uniform(rng);
        REQUIRE(ball.contains(p));
        mean += p;
    }
    mean /= n;
    CHECK(mean.norm() < 0.02);

    Rng a(77), b(77);
    for (int i = 0; i < 50; ++i) {
        CHECK(ball.sample_uniform(a) == ball.sample_uniform(b));
    }
}

TEST_CASE("sampled points stay inside skewed ellipsoids") {
    Rng rng(5);
    const Matrix q = random_spd(4, rng, 200.0);
    Vector c(4);
    c << 3.0, 0.0, -1.0, 2.0;
    Ellipsoid e(c, q);
    for (int i = 0; i < 2000; ++i) {
        CHECK(e.contains(e.sample_uniform(rng)));
    }
}

TEST_CASE("set distance lower bound on disjoint and identical sets") {
    Vector c1 = Vector::Zero(3);
    Vector c2 = Vector::Zero(3);
    c2[0] = 5.0;
    Ellipsoid b1(c1, Matrix::Identity(3, 3));
    Ellipsoid b2(c2, Matrix::Identity(3, 3));
    CHECK(set_distance_lb(b1, b2) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(set_distance_lb(b1, b1) == 0.0);
}

TEST_CASE("sampled distance brackets the true gap for disjoint balls") {
    Vector c2 = Vector::Zero(3);
    c2[0] = 5.0;
    Ellipsoid b1(Vector::Zero(3), Matrix::Identity(3, 3));
    Ellipsoid b2(c2, Matrix::Identity(3, 3));
    Rng rng(9);
    const double d = set_distance_sampled(b1, b2, 1000, rng);
    CHECK(d >= 3.0);
    CHECK(d <= 3.2);
}

TEST_CASE("sampled distance detects intersection") {
    Vector c2 = Vector::Zero(2);
    c2[0] = 0.5;
    Ellipsoid b1(Vector::Zero(2), Matrix::Identity(2, 2));
    Ellipsoid b2(c2, Matrix::Identity(2, 2));
    Rng rng(4);
    CHECK(set_distance_sampled(b1, b2, 200, rng) == 0.0);
    CHECK(set_distance_lb(b1, b2) == 0.0);

    // Identical sets: zero within sampling tolerance (exact via membership).
    Rng rng2(8);
    CHECK(set_distance_sampled(b1, b1, 100, rng2) <= 1e-3);
}

TEST_CASE("lower bound never exceeds the sampling oracle") {
    Rng rng(2024);
    for (int trial = 0; trial < 20; ++trial) {
        const int d = 2 + static_cast<int>(rng() % 3);
        Vector c1 = 4.0 * rnd::gaussian_vector(rng, d);
        Vector c2 = 4.0 * rnd::gaussian_vector(rng, d);
        Ellipsoid e1(c1, random_spd(d, rng, 9.0));
        Ellipsoid e2(c2, random_spd(d, rng, 9.0));
        const double lb = set_distance_lb(e1, e2);
        const double sampled = set_distance_sampled(e1, e2, 2000, rng);
        CHECK(lb >= 0.0);
        CHECK(lb <= sampled + 1e-9);
    }
}

TEST_CASE("dense boundary sampling approaches the lower bound for balls") {
    // For spheres the lower bound is exact, so the oracle must come close.
    Vector c2 = Vector::Zero(2);
    c2[0] = 5.0;
    Ellipsoid b1(Vector::Zero(2), Matrix::Identity(2, 2));
    Ellipsoid b2(c2, Matrix::Identity(2, 2));
    Rng rng(31);
    const double d = set_distance_sampled(b1, b2, 10000, rng);
    CHECK(d == doctest::Approx(3.0).epsilon(1e-3));
    CHECK(d >= set_distance_lb(b1, b2) - 1e-9);
}
