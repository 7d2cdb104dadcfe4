#include "obsplan/planner_deviation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "obsplan/solver_kernel.hpp"

namespace obsplan {

void DeviationProblem::validate() const {
    sys.validate();
    if (model == nullptr) throw std::invalid_argument("DeviationProblem: model is null");
    nominal.validate();
    if (nominal.horizon() < 1) throw std::invalid_argument("DeviationProblem: empty horizon");
    if (nominal.dynamics_residual(sys) > 1e-9) {
        throw std::invalid_argument("DeviationProblem: nominal is not dynamically consistent");
    }
    if (gamma < 0.0) throw std::invalid_argument("DeviationProblem: gamma must be >= 0");
    if (eps < 0.0) throw std::invalid_argument("DeviationProblem: eps must be >= 0");
}

namespace {

struct DeviationSpace {
    int N;
    int nx;
    Matrix input_map;       // G: stacked eta_1..eta_N from xi_0..xi_{N-1}
    Matrix terminal_rows;   // last nx rows of G
    Matrix feasible_basis;  // orthonormal basis of {G xi : terminal rows zero}
    Matrix kernel;          // kernel of the terminal rows in xi space
};

DeviationSpace build_space(const LtiSystem& sys, int N) {
    DeviationSpace sp;
    sp.N = N;
    sp.nx = sys.nx();
    const int nu = sys.nu();
    sp.input_map = Matrix::Zero(N * sp.nx, N * nu);
    // eta_{k+1} = sum_{j<=k} A^{k-j} B xi_j.
    std::vector<Matrix> powers(N);
    powers[0] = sys.B;
    for (int p = 1; p < N; ++p) powers[p] = sys.A * powers[p - 1];
    for (int k = 0; k < N; ++k) {
        for (int j = 0; j <= k; ++j) {
            sp.input_map.block(k * sp.nx, j * nu, sp.nx, nu) = powers[k - j];
        }
    }
    sp.terminal_rows = sp.input_map.bottomRows(sp.nx);
    Eigen::FullPivLU<Matrix> lu(sp.terminal_rows);
    lu.setThreshold(1e-10);
    sp.kernel = lu.kernel();
    if (sp.kernel.cols() == 1 && sp.kernel.col(0).cwiseAbs().maxCoeff() == 0.0) {
        sp.kernel.resize(N * nu, 0);  // trivial kernel
    }
    if (sp.kernel.cols() > 0) {
        const Matrix span = sp.input_map * sp.kernel;
        Eigen::ColPivHouseholderQR<Matrix> qr(span);
        qr.setThreshold(1e-12);
        const int rank = static_cast<int>(qr.rank());
        const Matrix q_full =
            qr.householderQ() * Matrix::Identity(span.rows(), std::min(span.rows(), span.cols()));
        sp.feasible_basis = q_full.leftCols(rank);
    } else {
        sp.feasible_basis.resize(N * sp.nx, 0);
    }
    return sp;
}

Vector project_subspace(const DeviationSpace& sp, const Vector& v) {
    if (sp.feasible_basis.cols() == 0) return Vector::Zero(v.size());
    return sp.feasible_basis * (sp.feasible_basis.transpose() * v);
}

Vector project_step_balls(const DeviationSpace& sp, const Vector& v, double gamma) {
    Vector out = v;
    for (int k = 0; k < sp.N; ++k) {
        auto seg = out.segment(k * sp.nx, sp.nx);
        const double norm = seg.norm();
        if (norm > gamma) seg *= gamma / norm;
    }
    return out;
}

/// Scale into the ball set without leaving the subspace (the subspace is
/// linear, so uniform scaling preserves membership).
Vector shrink_to_balls(const DeviationSpace& sp, const Vector& v, double gamma) {
    double worst = 0.0;
    for (int k = 0; k < sp.N; ++k) {
        worst = std::max(worst, v.segment(k * sp.nx, sp.nx).norm());
    }
    if (worst <= gamma) return v;
    return v * (gamma / worst);
}

}  // namespace

DeviationResult solve_deviation(const DeviationProblem& problem,
                                const DeviationOptions& opts) {
    problem.validate();
    const LtiSystem& sys = problem.sys;
    const int N = problem.nominal.horizon();
    const int nx = sys.nx();

    ObservabilityEvaluator eval(sys, *problem.model, N, problem.eps);

    DeviationResult result;
    result.trajectory = problem.nominal;
    result.report = eval.report(problem.nominal.states);
    result.objective_history.push_back(result.report.value);

    if (problem.gamma == 0.0) {
        result.status = SolveStatus::converged;
        return result;  // the zero deviation is the only feasible point
    }

    const DeviationSpace sp = build_space(sys, N);
    if (sp.feasible_basis.cols() == 0) {
        result.status = SolveStatus::converged;
        return result;
    }

    auto states_of = [&](const Vector& eta) {
        std::vector<Vector> states = problem.nominal.states;
        for (int k = 0; k < N; ++k) states[k + 1] += eta.segment(k * nx, nx);
        return states;
    };
    auto objective_of = [&](const Vector& eta) { return eval.value(states_of(eta)); };

    const std::vector<Projection> feasible_projs = {
        [&](const Vector& v) { return project_subspace(sp, v); },
        [&](const Vector& v) { return project_step_balls(sp, v, problem.gamma); }};
    auto project_feasible = [&](const Vector& v) {
        const DykstraResult dy =
            dykstra(v, feasible_projs, opts.dykstra_max_iters, opts.dykstra_tol);
        // Exact cleanup: land on the subspace, then shrink inside the balls.
        return shrink_to_balls(sp, project_subspace(sp, dy.point), problem.gamma);
    };

    Vector eta = Vector::Zero(N * nx);
    if (opts.initial_deviation) {
        if (static_cast<int>(opts.initial_deviation->size()) != N) {
            throw std::invalid_argument("solve_deviation: warm start has wrong length");
        }
        Vector guess(N * nx);
        for (int k = 0; k < N; ++k) guess.segment(k * nx, nx) = (*opts.initial_deviation)[k];
        guess = project_feasible(guess);
        if (objective_of(guess) > result.objective_history.back()) {
            eta = guess;
            result.objective_history.push_back(objective_of(eta));
        }
    }

    double current = objective_of(eta);
    result.status = SolveStatus::max_iterations;
    for (int iter = 0; iter < opts.max_iters; ++iter) {
        result.iterations = iter + 1;
        const auto grads = eval.gradient(states_of(eta));
        Vector ascent(N * nx);
        for (int k = 0; k < N; ++k) ascent.segment(k * nx, nx) = grads[k + 1];
        if (ascent.norm() == 0.0) {
            result.status = SolveStatus::converged;
            break;
        }

        double step = opts.initial_step;
        bool improved = false;
        for (int bt = 0; bt < opts.max_backtracks; ++bt) {
            const Vector trial = project_feasible(eta + step * ascent);
            const double value = objective_of(trial);
            if (value > current) {
                const double gain = value - current;
                eta = trial;
                current = value;
                result.objective_history.push_back(current);
                improved = true;
                if (gain <= opts.tol * (1.0 + std::abs(current))) {
                    result.status = SolveStatus::converged;
                }
                break;
            }
            step *= 0.5;
        }
        if (!improved) {
            // No feasible ascent step left: projected-subgradient stationarity.
            result.status = SolveStatus::converged;
            break;
        }
        if (result.status == SolveStatus::converged) break;
    }

    // Recover the input deviation and re-roll for an exactly consistent
    // trajectory.
    const Matrix reduced = sp.input_map * sp.kernel;
    const Vector coeffs =
        Eigen::ColPivHouseholderQR<Matrix>(reduced).solve(eta);
    const Vector xi = sp.kernel * coeffs;
    std::vector<Vector> inputs = problem.nominal.inputs;
    const int nu = sys.nu();
    for (int k = 0; k < N; ++k) inputs[k] += xi.segment(k * nu, nu);
    result.trajectory = rollout(sys, problem.nominal.states[0], inputs);
    result.report = eval.report(result.trajectory.states);
    return result;
}

}  // namespace obsplan
