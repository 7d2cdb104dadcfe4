#pragma once

#include <optional>
#include <vector>

#include "obsplan/types.hpp"
#include "obsplan/uncertainty.hpp"

namespace obsplan {

/// Sampling design for the synthetic validation experiment: relative ranges,
/// sun angles along a longitudinal plane, and the per-angle repetition counts
/// (random rotations times radial-plane repeats).
struct ValidationGrid {
    std::vector<double> ranges_m;
    std::vector<double> sun_angles_deg;
    int rotations_per_angle = 50;
    int radial_repeats = 12;

    int samples_per_cell() const { return rotations_per_angle * radial_repeats; }
    void validate() const;
};

/// Ranges 10..45 m in 5 m steps, sun angles 0..180 deg in 15 deg steps,
/// 50 rotations x 12 radial repeats = 600 measurements per angle.
ValidationGrid default_grid();

/// Configurable stand-in for the rendering/estimation stack: the mean error
/// grows linearly in range and quadratically in sun angle, scaled by bounded
/// multiplicative noise.
struct SyntheticErrorModel {
    double c0 = 0.05;
    double c1 = 0.002;
    double c2 = 3e-5;
    double noise_amplitude = 0.2;

    double mean(double range_m, double sun_angle_deg) const;
    double sample(double range_m, double sun_angle_deg, Rng& rng) const;
};

struct ValidationSample {
    double range_m = 0.0;
    double sun_angle_deg = 0.0;
    int rotation_id = 0;
    double error_norm = 0.0;
};

struct CellMaximum {
    double range_m = 0.0;
    double sun_angle_deg = 0.0;
    double max_error = 0.0;
};

struct EnvelopeFit {
    /// Per-range envelope over the sun-angle feature.
    std::vector<std::pair<double, QuadraticEnvelope>> per_range;
    /// Second-stage envelope over the range feature, fitted to the per-range
    /// peak errors (present when the grid has at least three ranges).
    std::optional<QuadraticEnvelope> over_range;
    std::vector<ValidationSample> dataset;
    std::vector<CellMaximum> maxima;
};

/// Run the sampler over the whole grid, take per-(range, angle) maxima, and
/// fit quadratic envelopes over the angle feature per range bucket.
EnvelopeFit build_envelope(const ValidationGrid& grid, const SyntheticErrorModel& sampler,
                           Rng& rng);

}  // namespace obsplan
