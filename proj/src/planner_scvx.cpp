#include "obsplan/planner_scvx.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace obsplan {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void RendezvousProblem::validate() const {
    sys.validate();
    if (model == nullptr) throw std::invalid_argument("RendezvousProblem: model is null");
    if (x0.size() != sys.nx()) throw std::invalid_argument("RendezvousProblem: x0 size mismatch");
    if (horizon < 1) throw std::invalid_argument("RendezvousProblem: horizon must be >= 1");
    if (!(u_max > 0.0)) throw std::invalid_argument("RendezvousProblem: u_max must be positive");
    if (keepout_radius < 0.0) {
        throw std::invalid_argument("RendezvousProblem: keep-out radius must be >= 0");
    }
    if (lambda_obs < 0.0) {
        throw std::invalid_argument("RendezvousProblem: lambda_obs must be >= 0");
    }
    if (Q.rows() != sys.nx() || R.rows() != sys.nu()) {
        throw std::invalid_argument("RendezvousProblem: weight dimension mismatch");
    }
    if ((sys.C * x0).norm() < keepout_radius) {
        throw std::invalid_argument("RendezvousProblem: x0 starts inside the keep-out zone");
    }
}

std::pair<Vector, double> linearize_keepout(const Vector& p_ref, double d) {
    const double n = p_ref.norm();
    if (n <= 1e-9) {
        throw std::invalid_argument("linearize_keepout: reference position at the origin");
    }
    return {p_ref / n, d};
}

namespace {

struct ScvxWork {
    const RendezvousProblem* p;
    const ScvxOptions* opts;
    Vector goal;
    Matrix Qf;
    double d_eff;  // keep-out radius with margin
    int N, nx, nu, nvars;
    ObservabilityEvaluator* eval;

    int xi(int k) const { return (k - 1) * nx; }                 // k = 1..N
    int ui(int k) const { return N * nx + k * nu; }              // k = 0..N-1
    int si(int k) const { return N * nx + N * nu + (k - 1); }    // k = 1..N

    double keepout_violation(const std::vector<Vector>& states) const {
        double worst = 0.0;
        for (int k = 1; k <= N; ++k) {
            worst = std::max(worst, d_eff - (p->sys.C * states[k]).norm());
        }
        return std::max(0.0, worst);
    }

    double tracking_cost(const Trajectory& traj) const {
        return quadratic_cost(traj, p->Q, p->R, Qf, goal);
    }

    /// Exact penalized objective used by the trust-region ratio test.
    double merit(const Trajectory& traj) const {
        double value = tracking_cost(traj) - p->lambda_obs * eval->value(traj.states);
        for (int k = 1; k <= N; ++k) {
            value += opts->slack_weight *
                     std::max(0.0, d_eff - (p->sys.C * traj.states[k]).norm());
        }
        return value;
    }
};

Trajectory clamp_inputs_and_roll(const LtiSystem& sys, const Vector& x0,
                                 std::vector<Vector> inputs, double u_max) {
    for (Vector& u : inputs) {
        for (int i = 0; i < u.size(); ++i) u[i] = std::clamp(u[i], -u_max, u_max);
    }
    return rollout(sys, x0, inputs);
}

Trajectory default_reference(const RendezvousProblem& p, const Matrix& Qf,
                             const Vector& goal) {
    const auto gains = finite_horizon_lqr(p.sys, p.Q, p.R, Qf, p.horizon);
    std::vector<Vector> inputs;
    Vector x = p.x0;
    for (int k = 0; k < p.horizon; ++k) {
        Vector u = -gains[k] * (x - goal);
        for (int i = 0; i < u.size(); ++i) u[i] = std::clamp(u[i], -p.u_max, p.u_max);
        inputs.push_back(u);
        x = p.sys.A * x + p.sys.B * u;
    }
    return rollout(p.sys, p.x0, inputs);
}

struct Subproblem {
    Qp qp;
    double constant = 0.0;  // folds the reference-dependent terms back in
};

Subproblem build_subproblem(const ScvxWork& w, const Trajectory& ref,
                            const std::vector<Vector>& obs_grad, double trust_radius) {
    const RendezvousProblem& p = *w.p;
    const int N = w.N, nx = w.nx, nu = w.nu;
    Subproblem sub;
    Qp& qp = sub.qp;
    qp.H = Matrix::Zero(w.nvars, w.nvars);
    qp.g = Vector::Zero(w.nvars);

    for (int k = 1; k <= N; ++k) {
        const Matrix& weight = (k == N) ? w.Qf : p.Q;
        qp.H.block(w.xi(k), w.xi(k), nx, nx) = 2.0 * weight;
        qp.g.segment(w.xi(k), nx) = -2.0 * weight * w.goal;
        if (p.lambda_obs > 0.0) {
            qp.g.segment(w.xi(k), nx) -= p.lambda_obs * obs_grad[k];
        }
        qp.g[w.si(k)] = w.opts->slack_weight;
    }
    for (int k = 0; k < N; ++k) {
        qp.H.block(w.ui(k), w.ui(k), nu, nu) = 2.0 * p.R;
    }

    // Dynamics equalities.
    qp.A_eq = Matrix::Zero(N * nx, w.nvars);
    qp.b_eq = Vector::Zero(N * nx);
    for (int k = 0; k < N; ++k) {
        qp.A_eq.block(k * nx, w.xi(k + 1), nx, nx) = Matrix::Identity(nx, nx);
        qp.A_eq.block(k * nx, w.ui(k), nx, nu) = -p.sys.B;
        if (k == 0) {
            qp.b_eq.segment(0, nx) = p.sys.A * p.x0;
        } else {
            qp.A_eq.block(k * nx, w.xi(k), nx, nx) = -p.sys.A;
        }
    }

    // Input box, linearized keep-out with slack, slack positivity.
    const int n_in = N * nu + 2 * N;
    qp.A_in = Matrix::Zero(n_in, w.nvars);
    qp.lb = Vector::Zero(n_in);
    qp.ub = Vector::Zero(n_in);
    int row = 0;
    for (int k = 0; k < N; ++k) {
        for (int i = 0; i < nu; ++i, ++row) {
            qp.A_in(row, w.ui(k) + i) = 1.0;
            qp.lb[row] = -p.u_max;
            qp.ub[row] = p.u_max;
        }
    }
    Vector last_direction = Vector::Zero(p.sys.ny());
    last_direction[0] = 1.0;
    for (int k = 1; k <= N; ++k, ++row) {
        Vector pos = p.sys.C * ref.states[k];
        if (pos.norm() <= 1e-9) pos = last_direction;  // degenerate reference
        const auto [a, b] = linearize_keepout(pos, w.d_eff);
        last_direction = a;
        qp.A_in.block(row, w.xi(k), 1, nx) = (a.transpose() * p.sys.C);
        qp.A_in(row, w.si(k)) = 1.0;
        qp.lb[row] = b;
        qp.ub[row] = kInf;
    }
    for (int k = 1; k <= N; ++k, ++row) {
        qp.A_in(row, w.si(k)) = 1.0;
        qp.lb[row] = 0.0;
        qp.ub[row] = kInf;
    }

    // Per-step trust region on the state deviation.
    for (int k = 1; k <= N; ++k) {
        QpBallConstraint ball;
        ball.D = Matrix::Zero(nx, w.nvars);
        ball.D.block(0, w.xi(k), nx, nx) = Matrix::Identity(nx, nx);
        ball.center = ref.states[k];
        ball.radius = trust_radius;
        qp.balls.push_back(ball);
    }

    // Constant terms so that the linearized objective is comparable with the
    // exact merit.
    const Vector dx0 = p.x0 - w.goal;
    sub.constant = dx0.dot(p.Q * dx0);
    sub.constant += (N - 1) * w.goal.dot(p.Q * w.goal) + w.goal.dot(w.Qf * w.goal);
    if (p.lambda_obs > 0.0) {
        sub.constant -= p.lambda_obs * w.eval->value(ref.states);
        for (int k = 1; k <= N; ++k) {
            sub.constant += p.lambda_obs * obs_grad[k].dot(ref.states[k]);
        }
    }
    return sub;
}

}  // namespace

ScvxResult solve_scvx(const RendezvousProblem& problem, const ScvxOptions& opts) {
    problem.validate();
    const int N = problem.horizon;
    const int nx = problem.sys.nx();
    const int nu = problem.sys.nu();

    ScvxWork w;
    w.p = &problem;
    w.opts = &opts;
    w.goal = problem.x_goal.size() == nx ? problem.x_goal : Vector::Zero(nx);
    w.Qf = problem.Qf.rows() == nx ? problem.Qf : problem.Q;
    w.d_eff = problem.keepout_radius > 0.0
                  ? problem.keepout_radius + opts.keepout_margin
                  : 0.0;
    w.N = N;
    w.nx = nx;
    w.nu = nu;
    w.nvars = N * nx + N * nu + N;

    ObservabilityEvaluator eval(problem.sys, *problem.model, N, problem.eps);
    w.eval = &eval;

    Trajectory ref;
    if (opts.initial_trajectory) {
        ref = clamp_inputs_and_roll(problem.sys, problem.x0,
                                    opts.initial_trajectory->inputs, problem.u_max);
    } else {
        ref = default_reference(problem, w.Qf, w.goal);
    }

    ScvxResult result;
    double merit_ref = w.merit(ref);
    double trust_radius = opts.trust_radius0;

    QpOptions qp_opts;
    qp_opts.tol = opts.qp_tol;
    qp_opts.max_iters = opts.qp_max_iters;
    Vector warm_x, warm_y;

    for (int iter = 1; iter <= opts.max_iters; ++iter) {
        const std::vector<Vector> obs_grad =
            problem.lambda_obs > 0.0 ? eval.gradient(ref.states)
                                     : std::vector<Vector>(N + 1, Vector::Zero(nx));
        const Subproblem sub = build_subproblem(w, ref, obs_grad, trust_radius);
        if (warm_x.size() == w.nvars) {
            qp_opts.warm_x = warm_x;
            qp_opts.warm_y = warm_y;
        }
        const QpSolution qp_sol = solve_qp(sub.qp, qp_opts);
        warm_x = qp_sol.x;
        warm_y = qp_sol.y;

        std::vector<Vector> inputs(N);
        for (int k = 0; k < N; ++k) inputs[k] = qp_sol.x.segment(w.ui(k), nu);
        const Trajectory candidate =
            clamp_inputs_and_roll(problem.sys, problem.x0, inputs, problem.u_max);

        const double merit_cand = w.merit(candidate);
        const double linear_cost = qp_sol.objective + sub.constant;
        const double predicted = merit_ref - linear_cost;
        const double actual = merit_ref - merit_cand;
        const double slack_cand = w.keepout_violation(candidate.states);

        ScvxIterationLog log;
        log.iter = iter;
        log.nonlinear_cost = merit_cand;
        log.linearized_cost = linear_cost;
        log.trust_radius = trust_radius;
        log.max_slack = slack_cand;

        const double scale = 1.0 + std::abs(merit_ref);
        const double conv_abs = opts.convergence_tol * scale;
        bool converged_now = false;
        if (predicted <= conv_abs && std::abs(actual) <= conv_abs) {
            // Neither the linear model nor the exact merit moves: stationary.
            log.ratio = 1.0;
            if (actual > 0.0) {
                log.accepted = true;
                ref = candidate;
                merit_ref = merit_cand;
            }
            if (w.keepout_violation(ref.states) < 1e-6 &&
                trust_radius > 10.0 * opts.trust_radius_min) {
                converged_now = true;
            } else {
                // Stationary but infeasible: only a smaller region can help.
                result.report.keepout_infeasible = true;
                trust_radius = std::max(trust_radius * opts.trust_shrink,
                                        opts.trust_radius_min);
            }
        } else {
            log.ratio = predicted > 0.0 ? actual / predicted : -1.0;
            if (log.ratio < opts.rho0) {
                trust_radius = std::max(trust_radius * opts.trust_shrink,
                                        opts.trust_radius_min);
            } else {
                log.accepted = true;
                ref = candidate;
                merit_ref = merit_cand;
                result.report.keepout_infeasible = false;
                if (log.ratio < opts.rho1) {
                    trust_radius = std::max(trust_radius * opts.trust_shrink,
                                            opts.trust_radius_min);
                } else if (log.ratio > opts.rho2) {
                    trust_radius = std::min(trust_radius * opts.trust_grow,
                                            opts.trust_radius_max);
                }
            }
        }
        result.report.iterations.push_back(log);
        if (log.accepted) ++result.report.accepted_count;
        if (converged_now) {
            result.report.converged = true;
            result.report.status = SolveStatus::converged;
            break;
        }
        if (trust_radius <= opts.trust_radius_min) break;
    }

    result.trajectory = ref;
    result.report.final_cost = merit_ref;
    if (!result.report.converged) result.report.status = SolveStatus::max_iterations;
    result.observability = eval.report(ref.states);
    return result;
}

}  // namespace obsplan
