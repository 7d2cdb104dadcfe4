#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace obsplan {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Random engine used throughout; every stochastic routine takes one by
/// reference so callers own seeding and determinism.
using Rng = std::mt19937_64;

namespace rnd {

/// Uniform double in [0, 1) with 53 bits of resolution. Implemented directly
/// on the engine output so results do not depend on the standard library's
/// distribution internals.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

inline double uniform(Rng& rng, double a, double b) {
    return a + (b - a) * uniform01(rng);
}

/// Standard normal via Box-Muller (cosine branch only, no cached state).
inline double gaussian(Rng& rng) {
    double u1 = uniform01(rng);
    double u2 = uniform01(rng);
    if (u1 <= 0.0) u1 = 5e-324;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

inline Vector gaussian_vector(Rng& rng, int dim) {
    Vector v(dim);
    for (int i = 0; i < dim; ++i) v[i] = gaussian(rng);
    return v;
}

/// Uniform direction on the unit sphere.
inline Vector unit_vector(Rng& rng, int dim) {
    Vector v = gaussian_vector(rng, dim);
    double n = v.norm();
    while (n < 1e-300) {
        v = gaussian_vector(rng, dim);
        n = v.norm();
    }
    return v / n;
}

/// Uniform point in the closed unit ball.
inline Vector ball_point(Rng& rng, int dim) {
    Vector dir = unit_vector(rng, dim);
    double r = std::pow(uniform01(rng), 1.0 / static_cast<double>(dim));
    return r * dir;
}

/// splitmix64 step; used to derive independent per-run seeds from a master.
inline std::uint64_t split_seed(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace rnd
}  // namespace obsplan
