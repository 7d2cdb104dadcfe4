#include "obsplan/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace obsplan {

double spectral_radius(const Matrix& m) {
    return m.eigenvalues().cwiseAbs().maxCoeff();
}

int observability_matrix_rank(const LtiSystem& sys) {
    const int nx = sys.nx();
    Matrix stacked(sys.ny() * nx, nx);
    Matrix cat = sys.C;
    for (int i = 0; i < nx; ++i) {
        stacked.middleRows(i * sys.ny(), sys.ny()) = cat;
        cat = cat * sys.A;
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(stacked);
    qr.setThreshold(1e-10);
    return static_cast<int>(qr.rank());
}

namespace {

void require_observable(const LtiSystem& sys) {
    const int rank = observability_matrix_rank(sys);
    if (rank < sys.nx()) {
        std::ostringstream msg;
        msg << "observer design: (A, C) unobservable, observability matrix rank "
            << rank << " < " << sys.nx();
        throw std::invalid_argument(msg.str());
    }
}

/// Real coefficients of prod (s - p_i), lowest degree first, leading 1 dropped.
std::vector<double> characteristic_coefficients(
    const std::vector<std::complex<double>>& poles) {
    std::vector<std::complex<double>> coeffs = {1.0};
    for (const auto& p : poles) {
        std::vector<std::complex<double>> next(coeffs.size() + 1, 0.0);
        for (std::size_t i = 0; i < coeffs.size(); ++i) {
            next[i + 1] += coeffs[i];
            next[i] -= p * coeffs[i];
        }
        coeffs = next;
    }
    std::vector<double> real_coeffs(poles.size());
    for (std::size_t i = 0; i < poles.size(); ++i) {
        if (std::abs(coeffs[i].imag()) > 1e-9 * (1.0 + std::abs(coeffs[i].real()))) {
            throw std::invalid_argument(
                "design_observer_poles: pole set is not conjugate-closed");
        }
        real_coeffs[i] = coeffs[i].real();
    }
    return real_coeffs;
}

bool poles_match(const Matrix& closed_loop,
                 const std::vector<std::complex<double>>& poles) {
    Eigen::VectorXcd got = closed_loop.eigenvalues();
    std::vector<std::complex<double>> achieved(got.data(), got.data() + got.size());
    auto order = [](const std::complex<double>& a, const std::complex<double>& b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    };
    std::vector<std::complex<double>> want = poles;
    std::sort(achieved.begin(), achieved.end(), order);
    std::sort(want.begin(), want.end(), order);
    for (std::size_t i = 0; i < want.size(); ++i) {
        if (std::abs(achieved[i] - want[i]) > 1e-6 * (1.0 + std::abs(want[i]))) {
            return false;
        }
    }
    return true;
}

}  // namespace

Observer design_observer_riccati(const LtiSystem& sys) {
    sys.validate();
    require_observable(sys);
    const int nx = sys.nx();
    const int ny = sys.ny();
    const Matrix qw = Matrix::Identity(nx, nx);
    const Matrix rw = Matrix::Identity(ny, ny);
    Matrix p = Matrix::Identity(nx, nx);
    for (int iter = 0; iter < 100000; ++iter) {
        const Matrix cpc = sys.C * p * sys.C.transpose() + rw;
        const Matrix apct = sys.A * p * sys.C.transpose();
        const Matrix next =
            sys.A * p * sys.A.transpose() + qw - apct * cpc.ldlt().solve(apct.transpose());
        const double change = (next - p).cwiseAbs().maxCoeff();
        p = 0.5 * (next + next.transpose());
        if (change < 1e-13 * (1.0 + p.cwiseAbs().maxCoeff())) break;
    }
    Observer obs;
    const Matrix cpc = sys.C * p * sys.C.transpose() + rw;
    obs.gain = sys.A * p * sys.C.transpose() * cpc.ldlt().solve(Matrix::Identity(ny, ny));
    if (spectral_radius(sys.A - obs.gain * sys.C) >= 1.0) {
        throw std::runtime_error("design_observer_riccati: resulting observer is unstable");
    }
    return obs;
}

Observer design_observer_poles(const LtiSystem& sys,
                               const std::vector<std::complex<double>>& poles) {
    sys.validate();
    require_observable(sys);
    const int nx = sys.nx();
    const int ny = sys.ny();
    if (static_cast<int>(poles.size()) != nx) {
        throw std::invalid_argument("design_observer_poles: need exactly nx poles");
    }

    // Square invertible output with real poles: assign A - L C = diag(poles).
    bool all_real = true;
    for (const auto& p : poles) all_real = all_real && std::abs(p.imag()) < 1e-12;
    if (all_real && ny == nx) {
        Eigen::FullPivLU<Matrix> lu(sys.C);
        if (lu.isInvertible()) {
            Matrix f = Matrix::Zero(nx, nx);
            for (int i = 0; i < nx; ++i) f(i, i) = poles[i].real();
            Observer obs;
            obs.gain = (sys.A - f) * lu.inverse();
            if (poles_match(sys.A - obs.gain * sys.C, poles)) return obs;
        }
    }

    // General case: Luenberger construction via a Sylvester equation
    // X A - F X = G C; then L = X^{-1} G places the spectrum of A - L C.
    // F is assembled from companion blocks. A single companion chain is only
    // reachable when the largest observability index allows it, so the pole
    // set is first split across ny blocks (conjugate pairs kept together),
    // with the single-chain form as a fallback.
    std::vector<Matrix> f_candidates;
    {
        std::vector<int> sizes(std::min(ny, nx), nx / std::min(ny, nx));
        for (int i = 0; i < nx % std::min(ny, nx); ++i) ++sizes[i];
        std::vector<std::vector<std::complex<double>>> groups(sizes.size());
        std::vector<std::complex<double>> queue = poles;
        std::sort(queue.begin(), queue.end(),
                  [](const std::complex<double>& a, const std::complex<double>& b) {
                      return std::abs(a.imag()) > std::abs(b.imag());
                  });
        bool grouped = true;
        for (std::size_t i = 0; i < queue.size();) {
            const bool pair = std::abs(queue[i].imag()) > 1e-12;
            const int need = pair ? 2 : 1;
            int target = -1;
            for (std::size_t gi = 0; gi < groups.size(); ++gi) {
                const int capacity = sizes[gi] - static_cast<int>(groups[gi].size());
                if (capacity >= need &&
                    (target < 0 || groups[gi].size() < groups[target].size())) {
                    target = static_cast<int>(gi);
                }
            }
            if (target < 0) {
                grouped = false;
                break;
            }
            groups[target].push_back(queue[i]);
            if (pair) groups[target].push_back(std::conj(queue[i]));
            i += need;
        }
        if (grouped) {
            Matrix f = Matrix::Zero(nx, nx);
            int offset = 0;
            for (const auto& group : groups) {
                const int k = static_cast<int>(group.size());
                if (k == 0) continue;
                const std::vector<double> c = characteristic_coefficients(group);
                for (int i = 0; i + 1 < k; ++i) f(offset + i, offset + i + 1) = 1.0;
                for (int i = 0; i < k; ++i) f(offset + k - 1, offset + i) = -c[i];
                offset += k;
            }
            f_candidates.push_back(f);
        }
    }
    {
        const std::vector<double> coeffs = characteristic_coefficients(poles);
        Matrix f = Matrix::Zero(nx, nx);
        for (int i = 0; i + 1 < nx; ++i) f(i, i + 1) = 1.0;
        for (int i = 0; i < nx; ++i) f(nx - 1, i) = -coeffs[i];
        f_candidates.push_back(f);
    }

    Rng rng(0x706c616365ULL);
    for (const Matrix& f : f_candidates) {
        Matrix sylvester = Matrix::Zero(nx * nx, nx * nx);
        for (int j = 0; j < nx; ++j) {
            for (int l = 0; l < nx; ++l) {
                sylvester.block(j * nx, l * nx, nx, nx) =
                    sys.A(l, j) * Matrix::Identity(nx, nx);
                if (j == l) sylvester.block(j * nx, l * nx, nx, nx) -= f;
            }
        }
        const Eigen::PartialPivLU<Matrix> sylvester_lu(sylvester);
        for (int attempt = 0; attempt < 24; ++attempt) {
            const Matrix g = Matrix::NullaryExpr(nx, ny, [&](Eigen::Index, Eigen::Index) {
                return rnd::gaussian(rng);
            });
            const Matrix gc = g * sys.C;
            Vector rhs(nx * nx);
            for (int j = 0; j < nx; ++j) rhs.segment(j * nx, nx) = gc.col(j);
            const Vector vec_x = sylvester_lu.solve(rhs);
            Matrix x(nx, nx);
            for (int j = 0; j < nx; ++j) x.col(j) = vec_x.segment(j * nx, nx);
            Eigen::FullPivLU<Matrix> x_lu(x);
            x_lu.setThreshold(1e-10);
            if (!x_lu.isInvertible()) continue;
            Observer obs;
            obs.gain = x_lu.solve(g);
            if (poles_match(sys.A - obs.gain * sys.C, poles)) return obs;
        }
    }
    throw std::runtime_error(
        "design_observer_poles: placement failed (spectra may coincide with A)");
}

namespace {

struct RunBuffers {
    // error norms and componentwise errors, indexed [run][step].
    std::vector<std::vector<double>> norms;
    std::vector<std::vector<Vector>> errors;
};

void simulate_runs(const LtiSystem& sys, const UncertaintyModel& model,
                   const Trajectory& reference, const Observer& observer,
                   const std::vector<Matrix>& gains, const Vector& offset,
                   const std::vector<std::uint64_t>& seeds, int first, int last,
                   RunBuffers& buffers) {
    const int T = reference.horizon();
    for (int run = first; run < last; ++run) {
        Rng rng(seeds[run]);
        Vector x_true = reference.states[0] + offset;
        Vector x_hat = reference.states[0];
        for (int t = 0; t <= T; ++t) {
            const Vector err = x_true - x_hat;
            buffers.norms[run][t] = err.norm();
            buffers.errors[run][t] = err;
            if (t == T) break;
            const Matrix& k = gains.size() == 1 ? gains[0] : gains[t];
            const Vector u = reference.inputs[t] - k * (x_hat - reference.states[t]);
            const Vector y = model.shape_at(x_true).sample_uniform(rng);
            x_hat = sys.A * x_hat + sys.B * u + observer.gain * (y - sys.C * x_hat);
            x_true = sys.A * x_true + sys.B * u;
        }
    }
}

/// Compensated (Kahan) accumulation so aggregation is exact in run order.
class KahanSum {
  public:
    void add(double v) {
        const double y = v - compensation_;
        const double t = sum_ + y;
        compensation_ = (t - sum_) - y;
        sum_ = t;
    }
    double value() const { return sum_; }

  private:
    double sum_ = 0.0;
    double compensation_ = 0.0;
};

}  // namespace

EstimationStats simulate_closed_loop(const LtiSystem& sys, const UncertaintyModel& model,
                                     const Trajectory& reference, const Observer& observer,
                                     const std::vector<Matrix>& tracker_gains, int runs,
                                     Rng& rng, const SimulationOptions& opts) {
    sys.validate();
    reference.validate();
    if (runs < 1) throw std::invalid_argument("simulate_closed_loop: need runs >= 1");
    if (tracker_gains.empty()) {
        throw std::invalid_argument("simulate_closed_loop: tracker gain missing");
    }
    if (tracker_gains.size() != 1 &&
        static_cast<int>(tracker_gains.size()) != reference.horizon()) {
        throw std::invalid_argument("simulate_closed_loop: gain sequence length mismatch");
    }
    if (spectral_radius(sys.A - observer.gain * sys.C) >= 1.0) {
        throw std::invalid_argument("simulate_closed_loop: observer is not stable");
    }
    if (tracker_gains.size() == 1 &&
        spectral_radius(sys.A - sys.B * tracker_gains[0]) >= 1.0) {
        throw std::invalid_argument("simulate_closed_loop: tracker gain is not stabilizing");
    }

    const int T = reference.horizon();
    const int nx = sys.nx();
    const Vector offset =
        opts.initial_offset.size() == nx ? opts.initial_offset : Vector::Zero(nx);

    // Per-run seeds drawn once, so results do not depend on the partitioning.
    std::vector<std::uint64_t> seeds(runs);
    for (int i = 0; i < runs; ++i) seeds[i] = rng();

    RunBuffers buffers;
    buffers.norms.assign(runs, std::vector<double>(T + 1, 0.0));
    buffers.errors.assign(runs, std::vector<Vector>(T + 1));

    const int threads = std::max(1, opts.threads);
    if (threads == 1) {
        simulate_runs(sys, model, reference, observer, tracker_gains, offset, seeds, 0,
                      runs, buffers);
    } else {
        std::vector<std::thread> pool;
        const int chunk = (runs + threads - 1) / threads;
        for (int w = 0; w < threads; ++w) {
            const int first = w * chunk;
            const int last = std::min(runs, first + chunk);
            if (first >= last) break;
            pool.emplace_back([&, first, last] {
                simulate_runs(sys, model, reference, observer, tracker_gains, offset,
                              seeds, first, last, buffers);
            });
        }
        for (auto& th : pool) th.join();
    }

    EstimationStats stats;
    stats.runs = runs;
    stats.mean_error_norm.resize(T + 1);
    stats.var_error_norm.resize(T + 1);
    stats.state_variance.assign(T + 1, Vector::Zero(nx));
    for (int t = 0; t <= T; ++t) {
        KahanSum mean_acc;
        for (int run = 0; run < runs; ++run) mean_acc.add(buffers.norms[run][t]);
        const double mean = mean_acc.value() / runs;
        stats.mean_error_norm[t] = mean;

        KahanSum var_acc;
        for (int run = 0; run < runs; ++run) {
            const double d = buffers.norms[run][t] - mean;
            var_acc.add(d * d);
        }
        stats.var_error_norm[t] = var_acc.value() / runs;

        for (int i = 0; i < nx; ++i) {
            KahanSum comp_mean;
            for (int run = 0; run < runs; ++run) comp_mean.add(buffers.errors[run][t][i]);
            const double mu = comp_mean.value() / runs;
            KahanSum comp_var;
            for (int run = 0; run < runs; ++run) {
                const double d = buffers.errors[run][t][i] - mu;
                comp_var.add(d * d);
            }
            stats.state_variance[t][i] = comp_var.value() / runs;
        }
    }

    const int tail = std::max(1, (T + 1) / 4);
    KahanSum tail_acc;
    for (int t = T + 1 - tail; t <= T; ++t) tail_acc.add(stats.var_error_norm[t]);
    stats.converged_variance = tail_acc.value() / tail;
    return stats;
}

}  // namespace obsplan
