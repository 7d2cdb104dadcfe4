// Acceptance suite: runs each top-level requirement at its stated tolerance
// and prints one PASS/FAIL line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "obsplan/estimation.hpp"
#include "obsplan/io.hpp"
#include "obsplan/planner_deviation.hpp"
#include "obsplan/planner_scvx.hpp"
#include "obsplan/solver_kernel.hpp"
#include "obsplan/validation.hpp"

using namespace obsplan;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string details;
};

class Harness {
  public:
    void run(int id, const std::string& name, double budget_seconds,
             const std::function<Outcome()>& fn) {
        const auto start = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = fn();
        } catch (const std::exception& err) {
            outcome.pass = false;
            outcome.details = std::string("exception: ") + err.what();
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (elapsed > budget_seconds) {
            outcome.pass = false;
            outcome.details += " [over time budget]";
        }
        std::printf("[%2d] %s %s (%.1f s)%s%s\n", id, outcome.pass ? "PASS" : "FAIL",
                    name.c_str(), elapsed, outcome.details.empty() ? "" : " -- ",
                    outcome.details.c_str());
        std::fflush(stdout);
        if (!outcome.pass) ++failures_;
    }

    int failures() const { return failures_; }

  private:
    int failures_ = 0;
};

LtiSystem random_system(int nx, int nu, int ny, Rng& rng) {
    LtiSystem sys;
    sys.dt = 1.0;
    sys.A = Matrix::NullaryExpr(nx, nx, [&](Eigen::Index, Eigen::Index) {
        return rnd::gaussian(rng);
    });
    const double radius = sys.A.eigenvalues().cwiseAbs().maxCoeff();
    sys.A *= rnd::uniform(rng, 0.5, 1.05) / std::max(radius, 1e-9);
    sys.B = Matrix::NullaryExpr(nx, nu, [&](Eigen::Index, Eigen::Index) {
        return rnd::gaussian(rng);
    });
    sys.C = Matrix::NullaryExpr(ny, nx, [&](Eigen::Index, Eigen::Index) {
        return rnd::gaussian(rng);
    });
    return sys;
}

Trajectory random_trajectory(const LtiSystem& sys, int T, Rng& rng) {
    std::vector<Vector> inputs;
    for (int t = 0; t < T; ++t) inputs.push_back(rnd::gaussian_vector(rng, sys.nu()));
    return rollout(sys, rnd::gaussian_vector(rng, sys.nx()), inputs);
}

Matrix random_spd(int n, Rng& rng, double cond_cap) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = rnd::gaussian(rng);
    const Matrix q = Eigen::HouseholderQR<Matrix>(m).householderQ();
    Vector eigs(n);
    for (int i = 0; i < n; ++i) eigs[i] = rnd::uniform(rng, 1.0, cond_cap);
    return q * eigs.asDiagonal() * q.transpose();
}

// ---------------------------------------------------------------------------
// Pinned desk-scale scenarios (mirroring configs/di_light.json and
// configs/rendezvous.json).
// ---------------------------------------------------------------------------

struct LightScenario {
    LtiSystem sys;
    Trajectory nominal;
    std::vector<Matrix> gains;
    QuadraticRadiusModel model;
    double eps = 0.5;
};

LightScenario make_light_scenario() {
    LtiSystem sys = double_integrator_2d(0.25);
    const Matrix q = Matrix::Identity(4, 4);
    const Matrix r = Matrix::Identity(2, 2);
    const Matrix qf = 20.0 * Matrix::Identity(4, 4);
    auto gains = finite_horizon_lqr(sys, q, r, qf, 20);
    Vector x0(4);
    x0 << 5.0, 5.0, 0.0, 0.0;
    std::vector<Vector> inputs;
    Vector x = x0;
    for (int t = 0; t < 20; ++t) {
        inputs.push_back(-gains[t] * x);
        x = sys.A * x + sys.B * inputs.back();
    }
    Trajectory nominal = rollout(sys, x0, inputs);
    Vector source(2);
    source << 2.0, -0.5;
    QuadraticRadiusModel model(0.08, source, 0.1, sys.C);
    model.set_lipschitz_ball_radius(4.0);
    return {std::move(sys), std::move(nominal), std::move(gains), std::move(model), 0.5};
}

struct RendezvousScenario {
    LtiSystem sys;
    IlluminationRadiusModel model;
    RendezvousProblem problem;
};

RendezvousScenario make_rendezvous(double lambda_obs, bool crossing) {
    const double n = mean_motion(3.986004418e14, 6.778e6);
    LtiSystem sys = cw_system(n, 20.0);
    Vector sun(3);
    sun << 1.0, 0.0, 0.0;
    IlluminationRadiusModel model(sun, 1.0, 0.1, sys.C);
    model.set_lipschitz_ball_radius(5.0);

    RendezvousProblem p;
    p.sys = sys;
    p.x0 = Vector::Zero(6);
    p.x0[1] = -30.0;
    p.x_goal = Vector::Zero(6);
    p.x_goal[1] = crossing ? 15.0 : -10.0;
    p.Q = 0.05 * Matrix::Identity(6, 6);
    p.R = 10.0 * Matrix::Identity(3, 3);
    p.Qf = 10.0 * Matrix::Identity(6, 6);
    p.keepout_radius = crossing ? 5.0 : 0.0;
    p.lambda_obs = lambda_obs;
    p.eps = 1.0;
    p.horizon = 30;
    p.u_max = crossing ? 0.05 : 0.15;
    RendezvousScenario sc{std::move(sys), std::move(model), std::move(p)};
    sc.problem.model = &sc.model;
    return sc;
}

double min_position_norm(const LtiSystem& sys, const Trajectory& traj) {
    double worst = std::numeric_limits<double>::infinity();
    for (const Vector& x : traj.states) worst = std::min(worst, (sys.C * x).norm());
    return worst;
}

EstimationStats evaluate_tracking(const LtiSystem& sys, const UncertaintyModel& model,
                                  const Trajectory& reference,
                                  const std::vector<Matrix>& gains, double eps, int runs,
                                  std::uint64_t seed) {
    const Observer observer = design_observer_riccati(sys);
    SimulationOptions opts;
    opts.initial_offset = eps * Vector::Ones(sys.nx()).normalized();
    Rng rng(seed);
    return simulate_closed_loop(sys, model, reference, observer, gains, runs, rng, opts);
}

// Brute-force oracle for criterion 10.
Vector active_set_box_qp(const Matrix& H, const Vector& g, const Vector& lb,
                         const Vector& ub) {
    const int n = static_cast<int>(g.size());
    int patterns = 1;
    for (int i = 0; i < n; ++i) patterns *= 3;
    Vector best;
    double best_obj = std::numeric_limits<double>::infinity();
    for (int p = 0; p < patterns; ++p) {
        int code = p;
        std::vector<int> kind(n);
        for (int i = 0; i < n; ++i) {
            kind[i] = code % 3;
            code /= 3;
        }
        std::vector<int> free_idx;
        Vector x = Vector::Zero(n);
        for (int i = 0; i < n; ++i) {
            if (kind[i] == 0) {
                free_idx.push_back(i);
            } else {
                x[i] = kind[i] == 1 ? lb[i] : ub[i];
            }
        }
        const int nf = static_cast<int>(free_idx.size());
        if (nf > 0) {
            Matrix hff(nf, nf);
            Vector rhs(nf);
            for (int a = 0; a < nf; ++a) {
                rhs[a] = -g[free_idx[a]];
                for (int b = 0; b < nf; ++b) hff(a, b) = H(free_idx[a], free_idx[b]);
                for (int i = 0; i < n; ++i) {
                    if (kind[i] != 0) rhs[a] -= H(free_idx[a], i) * x[i];
                }
            }
            const Vector xf = hff.ldlt().solve(rhs);
            for (int a = 0; a < nf; ++a) x[free_idx[a]] = xf[a];
        }
        bool ok = true;
        const Vector grad = H * x + g;
        for (int i = 0; i < n && ok; ++i) {
            if (kind[i] == 0) {
                ok = x[i] >= lb[i] - 1e-9 && x[i] <= ub[i] + 1e-9;
            } else if (kind[i] == 1) {
                ok = grad[i] >= -1e-9;
            } else {
                ok = grad[i] <= 1e-9;
            }
        }
        if (!ok) continue;
        const double obj = 0.5 * x.dot(H * x) + g.dot(x);
        if (obj < best_obj) {
            best_obj = obj;
            best = x;
        }
    }
    return best;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

int main() {
    Harness harness;

    harness.run(1, "bound soundness against the sampled oracle", 60.0, [] {
        Rng rng(1001);
        double worst_margin = std::numeric_limits<double>::infinity();
        for (int trial = 0; trial < 200; ++trial) {
            const int nx = 2 + static_cast<int>(rng() % 3);
            const int ny = 1 + static_cast<int>(rng() % nx);
            const int T = 3 + static_cast<int>(rng() % 13);
            const LtiSystem sys = random_system(nx, 1, ny, rng);
            const Trajectory nominal = random_trajectory(sys, T, rng);
            const double eps = rnd::uniform(rng, 0.2, 1.5);

            QuadraticRadiusModel model(rnd::uniform(rng, 0.0, 0.1),
                                       rnd::gaussian_vector(rng, ny),
                                       rnd::uniform(rng, 0.05, 0.3), sys.C);
            ObservabilityEvaluator eval(sys, model, T, eps);
            double reach = 0.0;
            for (int t = 0; t <= T; ++t) {
                reach = std::max(reach, eval.sigma_max_at(t) * eps * 2.0);
            }
            model.set_lipschitz_ball_radius(std::max(reach, 1e-3));

            const double lb = observability_lower_bound(sys, model, nominal, eps).value;
            const double sampled = degree_of_observability_sampled(
                sys, model, nominal, eps, 500, {1.0, 1.5, 2.0}, rng);
            worst_margin = std::min(worst_margin, sampled - lb);
            if (sampled - lb < -1e-9) {
                return Outcome{false, "violated at trial " + std::to_string(trial)};
            }
        }
        std::ostringstream d;
        d << "200 instances, worst margin " << worst_margin;
        return Outcome{true, d.str()};
    });

    harness.run(2, "concavity of the bound over state sequences", 10.0, [] {
        Rng rng(1002);
        for (int trial = 0; trial < 100; ++trial) {
            const int nx = 2 + static_cast<int>(rng() % 3);
            const int ny = 1 + static_cast<int>(rng() % nx);
            const int T = 4 + static_cast<int>(rng() % 6);
            const LtiSystem sys = random_system(nx, 1, ny, rng);
            QuadraticRadiusModel model(rnd::uniform(rng, 0.01, 0.2),
                                       rnd::gaussian_vector(rng, ny),
                                       rnd::uniform(rng, 0.05, 0.3), sys.C);
            model.set_lipschitz_ball_radius(rnd::uniform(rng, 0.5, 3.0));
            ObservabilityEvaluator eval(sys, model, T, rnd::uniform(rng, 0.1, 1.0));
            std::vector<Vector> xs, ys;
            for (int t = 0; t <= T; ++t) {
                xs.push_back(4.0 * rnd::gaussian_vector(rng, nx));
                ys.push_back(4.0 * rnd::gaussian_vector(rng, nx));
            }
            for (double theta : {0.25, 0.5, 0.75}) {
                std::vector<Vector> mix;
                for (int t = 0; t <= T; ++t) mix.push_back(theta * xs[t] + (1 - theta) * ys[t]);
                const double lhs = eval.value(mix);
                const double rhs = theta * eval.value(xs) + (1 - theta) * eval.value(ys);
                if (lhs < rhs - 1e-8) {
                    return Outcome{false, "concavity violated at trial " + std::to_string(trial)};
                }
            }
        }
        return Outcome{true, "100 sequence pairs, theta in {0.25, 0.5, 0.75}"};
    });

    harness.run(3, "set-distance ordering on random ellipsoid pairs", 30.0, [] {
        Rng rng(1003);
        for (int trial = 0; trial < 500; ++trial) {
            const int d = 2 + static_cast<int>(rng() % 5);
            const Ellipsoid e1(3.0 * rnd::gaussian_vector(rng, d), random_spd(d, rng, 9.0));
            const Ellipsoid e2(3.0 * rnd::gaussian_vector(rng, d), random_spd(d, rng, 9.0));
            const double lb = set_distance_lb(e1, e2);
            const double sampled = set_distance_sampled(e1, e2, 1000, rng);
            if (lb < 0.0 || lb > sampled + 1e-9) {
                return Outcome{false, "ordering violated at trial " + std::to_string(trial)};
            }
        }
        return Outcome{true, "500 pairs, 10^3 samples each"};
    });

    harness.run(4, "observability gradient vs central finite differences", 20.0, [] {
        Rng rng(1004);
        for (int trial = 0; trial < 50; ++trial) {
            const int nx = 2 + static_cast<int>(rng() % 3);
            const int ny = 1 + static_cast<int>(rng() % nx);
            const int T = 3 + static_cast<int>(rng() % 6);
            const LtiSystem sys = random_system(nx, 1, ny, rng);
            const Trajectory nominal = random_trajectory(sys, T, rng);
            QuadraticRadiusModel model(rnd::uniform(rng, 0.02, 0.2),
                                       rnd::gaussian_vector(rng, ny),
                                       rnd::uniform(rng, 0.05, 0.3), sys.C);
            model.set_lipschitz_ball_radius(rnd::uniform(rng, 0.5, 3.0));
            const double eps = rnd::uniform(rng, 0.2, 1.2);
            const auto grads = observability_lower_bound_gradient(sys, model, nominal, eps);
            ObservabilityEvaluator eval(sys, model, T, eps);
            const double h = 1e-5;
            for (int t = 0; t <= T; ++t) {
                for (int i = 0; i < nx; ++i) {
                    auto states = nominal.states;
                    states[t][i] += h;
                    const double up = eval.value(states);
                    states[t][i] -= 2 * h;
                    const double down = eval.value(states);
                    const double fd = (up - down) / (2 * h);
                    if (std::abs(grads[t][i] - fd) > 1e-4 * (1.0 + std::abs(fd))) {
                        return Outcome{false, "gradient mismatch at trial " +
                                                  std::to_string(trial)};
                    }
                }
            }
        }
        return Outcome{true, "50 instances at 1e-4 relative"};
    });

    harness.run(5, "deviation planner on the light-source scenario", 120.0, [] {
        const LightScenario sc = make_light_scenario();
        DeviationProblem problem;
        problem.sys = sc.sys;
        problem.model = &sc.model;
        problem.nominal = sc.nominal;
        problem.eps = sc.eps;

        problem.gamma = 0.0;
        const DeviationResult zero = solve_deviation(problem);
        for (std::size_t t = 0; t < sc.nominal.states.size(); ++t) {
            if ((zero.trajectory.states[t] - sc.nominal.states[t]).norm() != 0.0) {
                return Outcome{false, "gamma = 0 did not return the nominal exactly"};
            }
        }

        double previous = -std::numeric_limits<double>::infinity();
        std::ostringstream d;
        d << "objectives:";
        for (double gamma : {0.5, 1.0, 2.0, 4.0}) {
            problem.gamma = gamma;
            const DeviationResult res = solve_deviation(problem);
            double max_dev = 0.0;
            for (std::size_t t = 1; t < res.trajectory.states.size(); ++t) {
                max_dev = std::max(max_dev,
                                   (res.trajectory.states[t] - sc.nominal.states[t]).norm());
            }
            const double terminal =
                (res.trajectory.states.back() - sc.nominal.states.back()).norm();
            const double dyn = res.trajectory.dynamics_residual(sc.sys);
            if (max_dev > gamma + 1e-8 || terminal > 1e-8 || dyn > 1e-8) {
                return Outcome{false, "feasibility residuals exceeded at gamma " +
                                          std::to_string(gamma)};
            }
            if (res.report.value < previous - 1e-6) {
                return Outcome{false, "objective decreased at gamma " + std::to_string(gamma)};
            }
            previous = res.report.value;
            d << " " << res.report.value;
        }
        return Outcome{true, d.str()};
    });

    harness.run(6, "estimation variance ordering, 10000 runs", 300.0, [] {
        const LightScenario sc = make_light_scenario();
        DeviationProblem problem;
        problem.sys = sc.sys;
        problem.model = &sc.model;
        problem.nominal = sc.nominal;
        problem.gamma = 2.0;
        problem.eps = sc.eps;
        const DeviationResult aware = solve_deviation(problem);

        const EstimationStats nominal_stats = evaluate_tracking(
            sc.sys, sc.model, sc.nominal, sc.gains, sc.eps, 10000, 42);
        const EstimationStats aware_stats = evaluate_tracking(
            sc.sys, sc.model, aware.trajectory, sc.gains, sc.eps, 10000, 42);
        const double ratio =
            aware_stats.converged_variance / nominal_stats.converged_variance;
        std::ostringstream d;
        d << "variance ratio aware/nominal = " << ratio;
        return Outcome{aware_stats.converged_variance <= nominal_stats.converged_variance,
                       d.str()};
    });

    harness.run(7, "scvx keep-out, illumination ordering, desk-scale estimation", 300.0, [] {
        Trajectory nominal_traj, aware_traj;
        std::vector<Matrix> gains;
        double previous = std::numeric_limits<double>::infinity();
        std::ostringstream d;
        d << "terminal mismatch:";
        for (double lambda : {0.0, 4.0, 40.0}) {
            RendezvousScenario sc = make_rendezvous(lambda, true);
            const ScvxResult res = solve_scvx(sc.problem);
            if (!res.report.converged) {
                return Outcome{false, "scvx did not converge at lambda " +
                                          std::to_string(lambda)};
            }
            if (res.report.iterations.back().max_slack >= 1e-6) {
                return Outcome{false, "slack persisted at lambda " + std::to_string(lambda)};
            }
            if (min_position_norm(sc.problem.sys, res.trajectory) < 5.0 - 1e-6) {
                return Outcome{false, "keep-out violated at lambda " + std::to_string(lambda)};
            }
            const double mismatch =
                sc.model.mismatch(sc.problem.sys.C * res.trajectory.states.back());
            if (mismatch > previous + 1e-9) {
                return Outcome{false, "terminal illumination not monotone at lambda " +
                                          std::to_string(lambda)};
            }
            previous = mismatch;
            d << " " << mismatch;
            if (lambda == 0.0) {
                nominal_traj = res.trajectory;
                gains = finite_horizon_lqr(sc.problem.sys, sc.problem.Q, sc.problem.R,
                                           sc.problem.Qf, sc.problem.horizon);
            }
            if (lambda == 40.0) aware_traj = res.trajectory;
        }

        RendezvousScenario sc = make_rendezvous(0.0, true);
        const EstimationStats nominal_stats = evaluate_tracking(
            sc.problem.sys, sc.model, nominal_traj, gains, sc.problem.eps, 5000, 77);
        const EstimationStats aware_stats = evaluate_tracking(
            sc.problem.sys, sc.model, aware_traj, gains, sc.problem.eps, 5000, 77);
        const double ratio =
            aware_stats.converged_variance / nominal_stats.converged_variance;
        d << "; 5000-run variance ratio = " << ratio;
        return Outcome{aware_stats.converged_variance <= nominal_stats.converged_variance,
                       d.str()};
    });

    harness.run(8, "scvx degenerates to LQ tracking", 30.0, [] {
        RendezvousScenario sc = make_rendezvous(0.0, false);
        const ScvxResult res = solve_scvx(sc.problem);
        if (!res.report.converged) return Outcome{false, "did not converge"};

        const auto gains = finite_horizon_lqr(sc.problem.sys, sc.problem.Q, sc.problem.R,
                                              sc.problem.Qf, sc.problem.horizon);
        std::vector<Vector> inputs;
        Vector x = sc.problem.x0;
        for (int k = 0; k < sc.problem.horizon; ++k) {
            inputs.push_back(-gains[k] * (x - sc.problem.x_goal));
            x = sc.problem.sys.A * x + sc.problem.sys.B * inputs.back();
        }
        const Trajectory lqr = rollout(sc.problem.sys, sc.problem.x0, inputs);
        const double lqr_cost = quadratic_cost(lqr, sc.problem.Q, sc.problem.R,
                                               sc.problem.Qf, sc.problem.x_goal);
        const double scvx_cost = quadratic_cost(res.trajectory, sc.problem.Q, sc.problem.R,
                                                sc.problem.Qf, sc.problem.x_goal);
        const double rel = std::abs(scvx_cost - lqr_cost) / std::abs(lqr_cost);
        std::ostringstream d;
        d << "relative cost gap " << rel;
        return Outcome{rel <= 1e-4, d.str()};
    });

    harness.run(9, "validation grid and envelope pipeline", 60.0, [] {
        const ValidationGrid grid = default_grid();
        if (grid.ranges_m.size() != 8 || grid.sun_angles_deg.size() != 13 ||
            grid.rotations_per_angle != 50) {
            return Outcome{false, "default grid dimensions mismatch"};
        }

        SyntheticErrorModel noiseless;
        noiseless.noise_amplitude = 0.0;
        ValidationGrid small = grid;
        small.rotations_per_angle = 2;
        small.radial_repeats = 1;
        Rng rng(1009);
        const EnvelopeFit exact = build_envelope(small, noiseless, rng);
        for (const auto& [range, env] : exact.per_range) {
            if (std::abs(env.alpha - noiseless.c2) > 1e-6 || std::abs(env.beta) > 1e-6 ||
                std::abs(env.gamma - (noiseless.c0 + noiseless.c1 * range)) > 1e-6) {
                return Outcome{false, "noiseless quadratic recovery failed"};
            }
        }

        SyntheticErrorModel noisy;
        ValidationGrid desk = grid;
        desk.rotations_per_angle = 10;
        desk.radial_repeats = 3;
        const EnvelopeFit fit = build_envelope(desk, noisy, rng);
        const std::size_t n_angles = desk.sun_angles_deg.size();
        for (std::size_t ri = 0; ri < desk.ranges_m.size(); ++ri) {
            for (std::size_t ai = 0; ai < n_angles; ++ai) {
                const CellMaximum& cm = fit.maxima[ri * n_angles + ai];
                if (fit.per_range[ri].second.value(cm.sun_angle_deg) < cm.max_error - 1e-9) {
                    return Outcome{false, "envelope failed to dominate a maximum"};
                }
            }
        }
        return Outcome{true, "grid 8x13x50, envelopes dominate, recovery at 1e-6"};
    });

    harness.run(10, "QP kernel matches active-set enumeration", 30.0, [] {
        Rng rng(1010);
        for (int trial = 0; trial < 100; ++trial) {
            const int n = 5;
            Qp qp;
            qp.H = random_spd(n, rng, 20.0);
            qp.g = 2.0 * rnd::gaussian_vector(rng, n);
            qp.A_in = Matrix::Identity(n, n);
            qp.lb = Vector(n);
            qp.ub = Vector(n);
            for (int i = 0; i < n; ++i) {
                qp.lb[i] = rnd::uniform(rng, -1.5, 0.0);
                qp.ub[i] = rnd::uniform(rng, 0.0, 1.5);
            }
            const Vector expected = active_set_box_qp(qp.H, qp.g, qp.lb, qp.ub);
            if (expected.size() != n) return Outcome{false, "oracle failed"};
            const QpSolution sol = solve_qp(qp);
            if ((sol.x - expected).cwiseAbs().maxCoeff() > 1e-6) {
                return Outcome{false, "solution mismatch at trial " + std::to_string(trial)};
            }
        }
        return Outcome{true, "100 box QPs at 1e-6"};
    });

    harness.run(11, "CLI determinism: byte-identical reruns", 300.0, [] {
        const std::string cli = OBSPLAN_CLI_PATH;
        const std::string cfg_dir = OBSPLAN_CONFIG_DIR;
        const fs::path base = fs::temp_directory_path() / "obsplan_acceptance";
        fs::remove_all(base);

        struct Job {
            std::string command;
            std::string config;
            std::vector<std::string> files;
        };
        const std::vector<Job> jobs = {
            {"validate-envelope", cfg_dir + "/validation.json",
             {"dataset.csv", "maxima.csv", "envelope.csv"}},
            {"plan-deviation", cfg_dir + "/di_light.json",
             {"nominal.csv", "aware.csv", "obs_report.csv", "obs_nominal.csv"}},
        };
        for (const Job& job : jobs) {
            const fs::path out1 = base / (job.command + "_1");
            const fs::path out2 = base / (job.command + "_2");
            for (const fs::path& out : {out1, out2}) {
                const std::string cmd = cli + " " + job.command + " --config " + job.config +
                                        " --seed 31415 --out " + out.string() +
                                        " > /dev/null 2>&1";
                if (std::system(cmd.c_str()) != 0) {
                    return Outcome{false, job.command + " exited nonzero"};
                }
            }
            for (const std::string& file : job.files) {
                if (slurp(out1 / file) != slurp(out2 / file)) {
                    return Outcome{false, job.command + "/" + file + " differed between runs"};
                }
                if (slurp(out1 / file).rfind("# config_hash=", 0) != 0) {
                    return Outcome{false, job.command + "/" + file + " missing config hash"};
                }
            }
        }
        fs::remove_all(base);
        return Outcome{true, "validate-envelope and plan-deviation reruns identical"};
    });

    if (harness.failures() == 0) {
        std::printf("acceptance: all criteria passed\n");
        return 0;
    }
    std::printf("acceptance: %d criterion(s) failed\n", harness.failures());
    return 1;
}
