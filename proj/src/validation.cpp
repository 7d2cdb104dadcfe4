#include "obsplan/validation.hpp"

#include <algorithm>
#include <stdexcept>

namespace obsplan {

void ValidationGrid::validate() const {
    if (ranges_m.empty() || sun_angles_deg.empty()) {
        throw std::invalid_argument("ValidationGrid: empty grid");
    }
    if (rotations_per_angle < 1 || radial_repeats < 1) {
        throw std::invalid_argument("ValidationGrid: repetition counts must be >= 1");
    }
}

ValidationGrid default_grid() {
    ValidationGrid grid;
    for (double r = 10.0; r <= 45.0 + 1e-9; r += 5.0) grid.ranges_m.push_back(r);
    for (double a = 0.0; a <= 180.0 + 1e-9; a += 15.0) grid.sun_angles_deg.push_back(a);
    grid.rotations_per_angle = 50;
    grid.radial_repeats = 12;
    return grid;
}

double SyntheticErrorModel::mean(double range_m, double sun_angle_deg) const {
    return c0 + c1 * range_m + c2 * sun_angle_deg * sun_angle_deg;
}

double SyntheticErrorModel::sample(double range_m, double sun_angle_deg, Rng& rng) const {
    const double noise = rnd::uniform(rng, -noise_amplitude, noise_amplitude);
    return std::max(0.0, mean(range_m, sun_angle_deg) * (1.0 + noise));
}

EnvelopeFit build_envelope(const ValidationGrid& grid, const SyntheticErrorModel& sampler,
                           Rng& rng) {
    grid.validate();
    EnvelopeFit fit;
    const int per_cell = grid.samples_per_cell();
    fit.dataset.reserve(grid.ranges_m.size() * grid.sun_angles_deg.size() * per_cell);

    // Independent per-cell streams drawn up front; cells can then be
    // evaluated in any order.
    std::vector<std::uint64_t> cell_seeds(grid.ranges_m.size() * grid.sun_angles_deg.size());
    for (auto& seed : cell_seeds) seed = rng();

    std::size_t cell = 0;
    for (double range : grid.ranges_m) {
        for (double angle : grid.sun_angles_deg) {
            Rng cell_rng(cell_seeds[cell++]);
            double cell_max = 0.0;
            for (int i = 0; i < per_cell; ++i) {
                ValidationSample sample;
                sample.range_m = range;
                sample.sun_angle_deg = angle;
                sample.rotation_id = i;
                sample.error_norm = sampler.sample(range, angle, cell_rng);
                cell_max = std::max(cell_max, sample.error_norm);
                fit.dataset.push_back(sample);
            }
            fit.maxima.push_back({range, angle, cell_max});
        }
    }

    const std::size_t n_angles = grid.sun_angles_deg.size();
    std::vector<std::pair<double, double>> peaks;
    for (std::size_t ri = 0; ri < grid.ranges_m.size(); ++ri) {
        std::vector<std::pair<double, double>> bucket;
        double peak = 0.0;
        for (std::size_t ai = 0; ai < n_angles; ++ai) {
            const CellMaximum& cm = fit.maxima[ri * n_angles + ai];
            bucket.emplace_back(cm.sun_angle_deg, cm.max_error);
            peak = std::max(peak, cm.max_error);
        }
        fit.per_range.emplace_back(grid.ranges_m[ri], fit_quadratic_envelope(bucket));
        peaks.emplace_back(grid.ranges_m[ri], peak);
    }
    if (peaks.size() >= 3) {
        fit.over_range = fit_quadratic_envelope(peaks);
    }
    return fit;
}

}  // namespace obsplan
