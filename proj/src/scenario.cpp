#include "obsplan/scenario.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>

#include <json.hpp>

#include "obsplan/estimation.hpp"
#include "obsplan/io.hpp"
#include "obsplan/planner_deviation.hpp"
#include "obsplan/planner_scvx.hpp"
#include "obsplan/validation.hpp"

namespace obsplan {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

void check_keys(const json& obj, const std::string& path,
                const std::set<std::string>& allowed) {
    if (!obj.is_object()) throw ConfigError(path + ": expected an object");
    for (const auto& item : obj.items()) {
        if (!allowed.count(item.key())) {
            throw ConfigError(path + ": unknown key '" + item.key() + "'");
        }
    }
}

const json& require(const json& obj, const std::string& path, const std::string& key) {
    if (!obj.contains(key)) throw ConfigError(path + ": missing key '" + key + "'");
    return obj.at(key);
}

double number(const json& v, const std::string& path) {
    if (!v.is_number()) throw ConfigError(path + ": expected a number");
    return v.get<double>();
}

double number_or(const json& obj, const std::string& path, const std::string& key,
                 double fallback) {
    if (!obj.contains(key)) return fallback;
    return number(obj.at(key), path + "." + key);
}

int integer(const json& v, const std::string& path) {
    if (!v.is_number_integer()) throw ConfigError(path + ": expected an integer");
    return v.get<int>();
}

Vector vector_of(const json& v, const std::string& path) {
    if (!v.is_array()) throw ConfigError(path + ": expected an array");
    Vector out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = number(v[i], path);
    return out;
}

/// Weights are either a scalar (times identity) or an array (diagonal).
Matrix weight_matrix(const json& v, const std::string& path, int dim) {
    if (v.is_number()) {
        return v.get<double>() * Matrix::Identity(dim, dim);
    }
    const Vector diag = vector_of(v, path);
    if (diag.size() != dim) throw ConfigError(path + ": expected " + std::to_string(dim) +
                                              " diagonal entries");
    return Matrix(diag.asDiagonal());
}

std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t hash = 1469598103934665603ULL;
    for (unsigned char c : data) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    return hash;
}

std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

struct Scenario {
    json config;
    std::string hash;
    std::uint64_t seed = 0;
    fs::path out_dir;

    LtiSystem sys;
    std::unique_ptr<UncertaintyModel> model;

    std::string comment() const { return "config_hash=" + hash; }
};

LtiSystem build_system(const json& cfg) {
    check_keys(cfg, "system", {"type", "dt", "mean_motion", "mu", "semi_major_axis"});
    const std::string type = require(cfg, "system", "type").get<std::string>();
    const double dt = number(require(cfg, "system", "dt"), "system.dt");
    if (type == "double_integrator_2d") {
        return double_integrator_2d(dt);
    }
    if (type == "cw") {
        double n;
        if (cfg.contains("mean_motion")) {
            n = number(cfg.at("mean_motion"), "system.mean_motion");
        } else if (cfg.contains("mu") && cfg.contains("semi_major_axis")) {
            n = mean_motion(number(cfg.at("mu"), "system.mu"),
                            number(cfg.at("semi_major_axis"), "system.semi_major_axis"));
        } else {
            throw ConfigError("system: cw needs mean_motion or mu + semi_major_axis");
        }
        return cw_system(n, dt);
    }
    throw ConfigError("system.type: unknown system '" + type + "'");
}

std::unique_ptr<UncertaintyModel> build_model(const json& cfg, const LtiSystem& sys) {
    check_keys(cfg, "uncertainty",
               {"type", "k", "source", "r0", "sun_direction", "a2", "a0",
                "lipschitz_ball_radius"});
    const std::string type = require(cfg, "uncertainty", "type").get<std::string>();
    std::unique_ptr<UncertaintyModel> model;
    if (type == "quadratic") {
        model = std::make_unique<QuadraticRadiusModel>(
            number(require(cfg, "uncertainty", "k"), "uncertainty.k"),
            vector_of(require(cfg, "uncertainty", "source"), "uncertainty.source"),
            number(require(cfg, "uncertainty", "r0"), "uncertainty.r0"), sys.C);
    } else if (type == "illumination") {
        model = std::make_unique<IlluminationRadiusModel>(
            vector_of(require(cfg, "uncertainty", "sun_direction"),
                      "uncertainty.sun_direction"),
            number(require(cfg, "uncertainty", "a2"), "uncertainty.a2"),
            number(require(cfg, "uncertainty", "a0"), "uncertainty.a0"), sys.C);
    } else {
        throw ConfigError("uncertainty.type: unknown model '" + type + "'");
    }
    if (cfg.contains("lipschitz_ball_radius")) {
        model->set_lipschitz_ball_radius(
            number(cfg.at("lipschitz_ball_radius"), "uncertainty.lipschitz_ball_radius"));
    }
    return model;
}

Scenario load_scenario(const std::string& config_path, const CliOverrides& overrides,
                       bool needs_system) {
    std::ifstream in(config_path);
    if (!in) throw ConfigError("cannot open config file: " + config_path);
    json config;
    try {
        config = json::parse(in);
    } catch (const json::parse_error& err) {
        throw ConfigError(std::string("config parse error: ") + err.what());
    }
    check_keys(config, "config",
               {"name", "seed", "output_dir", "system", "uncertainty", "nominal",
                "planner", "evaluation", "validation"});
    require(config, "config", "name");
    require(config, "config", "seed");

    // Overrides are folded into the effective config before hashing so the
    // provenance header identifies what actually ran.
    if (overrides.seed) config["seed"] = *overrides.seed;
    if (overrides.out_dir) config["output_dir"] = *overrides.out_dir;
    if (overrides.runs) {
        if (!config.contains("evaluation")) config["evaluation"] = json::object();
        config["evaluation"]["runs"] = *overrides.runs;
    }
    if (overrides.lambda_obs) {
        if (!config.contains("planner") ||
            require(config.at("planner"), "planner", "type").get<std::string>() != "scvx") {
            throw ConfigError("--lambda-obs override requires an scvx planner block");
        }
        config["planner"]["lambda_obs"] = *overrides.lambda_obs;
    }
    if (!config.contains("output_dir")) {
        throw ConfigError("config: missing output_dir (or --out)");
    }

    Scenario sc;
    sc.config = config;
    // The hash identifies the run content; where it lands on disk is not
    // part of it.
    json hash_source = config;
    hash_source.erase("output_dir");
    sc.hash = hex64(fnv1a64(hash_source.dump()));
    sc.seed = config.at("seed").get<std::uint64_t>();
    sc.out_dir = config.at("output_dir").get<std::string>();
    if (needs_system) {
        sc.sys = build_system(require(config, "config", "system"));
        sc.model = build_model(require(config, "config", "uncertainty"), sc.sys);
    }
    return sc;
}

struct NominalSetup {
    Trajectory trajectory;
    std::vector<Matrix> gains;
    double eps = 0.0;
};

/// The deviation scenarios start from a finite-horizon LQR trajectory.
NominalSetup build_nominal(const Scenario& sc) {
    const json& cfg = require(sc.config, "config", "nominal");
    check_keys(cfg, "nominal", {"x0", "horizon", "q", "r", "qf"});
    const Vector x0 = vector_of(require(cfg, "nominal", "x0"), "nominal.x0");
    if (x0.size() != sc.sys.nx()) throw ConfigError("nominal.x0: dimension mismatch");
    const int horizon = integer(require(cfg, "nominal", "horizon"), "nominal.horizon");
    if (horizon < 1) throw ConfigError("nominal.horizon: must be >= 1");
    const Matrix q = weight_matrix(require(cfg, "nominal", "q"), "nominal.q", sc.sys.nx());
    const Matrix r = weight_matrix(require(cfg, "nominal", "r"), "nominal.r", sc.sys.nu());
    const Matrix qf = cfg.contains("qf")
                          ? weight_matrix(cfg.at("qf"), "nominal.qf", sc.sys.nx())
                          : q;

    NominalSetup setup;
    setup.gains = finite_horizon_lqr(sc.sys, q, r, qf, horizon);
    std::vector<Vector> inputs;
    Vector x = x0;
    for (int t = 0; t < horizon; ++t) {
        inputs.push_back(-setup.gains[t] * x);
        x = sc.sys.A * x + sc.sys.B * inputs.back();
    }
    setup.trajectory = rollout(sc.sys, x0, inputs);
    return setup;
}

struct PlannedPair {
    Trajectory nominal;
    Trajectory aware;
    std::vector<Matrix> tracker_gains;
    double eps = 0.0;
    bool converged = true;
    ObservabilityReport nominal_report;
    ObservabilityReport aware_report;
    std::optional<ScvxReport> scvx_report;
};

PlannedPair run_deviation_planner(const Scenario& sc) {
    const json& cfg = require(sc.config, "config", "planner");
    check_keys(cfg, "planner",
               {"type", "gamma", "eps", "max_iters", "tol", "dykstra_tol"});
    PlannedPair out;
    const NominalSetup nominal = build_nominal(sc);
    out.nominal = nominal.trajectory;
    out.tracker_gains = nominal.gains;

    DeviationProblem problem;
    problem.sys = sc.sys;
    problem.model = sc.model.get();
    problem.nominal = nominal.trajectory;
    problem.gamma = number(require(cfg, "planner", "gamma"), "planner.gamma");
    problem.eps = number(require(cfg, "planner", "eps"), "planner.eps");
    out.eps = problem.eps;

    DeviationOptions opts;
    if (cfg.contains("max_iters")) {
        opts.max_iters = integer(cfg.at("max_iters"), "planner.max_iters");
    }
    opts.tol = number_or(cfg, "planner", "tol", opts.tol);
    opts.dykstra_tol = number_or(cfg, "planner", "dykstra_tol", opts.dykstra_tol);

    const DeviationResult result = solve_deviation(problem, opts);
    out.aware = result.trajectory;
    out.aware_report = result.report;
    out.converged = result.status == SolveStatus::converged;

    ObservabilityEvaluator eval(sc.sys, *sc.model, out.nominal.horizon(), problem.eps);
    out.nominal_report = eval.report(out.nominal.states);
    return out;
}

struct ScvxSetup {
    RendezvousProblem problem;
    ScvxOptions opts;
};

ScvxSetup build_scvx(const Scenario& sc) {
    const json& cfg = require(sc.config, "config", "planner");
    check_keys(cfg, "planner",
               {"type", "x0", "x_goal", "horizon", "q", "r", "qf", "keepout_radius",
                "u_max", "lambda_obs", "eps", "trust_radius0", "trust_shrink",
                "trust_grow", "rho0", "rho1", "rho2", "slack_weight", "max_iters",
                "tol", "qp_tol", "keepout_margin"});
    ScvxSetup setup;
    RendezvousProblem& p = setup.problem;
    p.sys = sc.sys;
    p.model = sc.model.get();
    p.x0 = vector_of(require(cfg, "planner", "x0"), "planner.x0");
    if (cfg.contains("x_goal")) p.x_goal = vector_of(cfg.at("x_goal"), "planner.x_goal");
    p.horizon = integer(require(cfg, "planner", "horizon"), "planner.horizon");
    p.Q = weight_matrix(require(cfg, "planner", "q"), "planner.q", sc.sys.nx());
    p.R = weight_matrix(require(cfg, "planner", "r"), "planner.r", sc.sys.nu());
    if (cfg.contains("qf")) p.Qf = weight_matrix(cfg.at("qf"), "planner.qf", sc.sys.nx());
    p.keepout_radius =
        number(require(cfg, "planner", "keepout_radius"), "planner.keepout_radius");
    p.u_max = number(require(cfg, "planner", "u_max"), "planner.u_max");
    p.lambda_obs = number(require(cfg, "planner", "lambda_obs"), "planner.lambda_obs");
    p.eps = number(require(cfg, "planner", "eps"), "planner.eps");

    ScvxOptions& o = setup.opts;
    o.trust_radius0 = number_or(cfg, "planner", "trust_radius0", o.trust_radius0);
    o.trust_shrink = number_or(cfg, "planner", "trust_shrink", o.trust_shrink);
    o.trust_grow = number_or(cfg, "planner", "trust_grow", o.trust_grow);
    o.rho0 = number_or(cfg, "planner", "rho0", o.rho0);
    o.rho1 = number_or(cfg, "planner", "rho1", o.rho1);
    o.rho2 = number_or(cfg, "planner", "rho2", o.rho2);
    o.slack_weight = number_or(cfg, "planner", "slack_weight", o.slack_weight);
    if (cfg.contains("max_iters")) {
        o.max_iters = integer(cfg.at("max_iters"), "planner.max_iters");
    }
    o.convergence_tol = number_or(cfg, "planner", "tol", o.convergence_tol);
    o.qp_tol = number_or(cfg, "planner", "qp_tol", o.qp_tol);
    o.keepout_margin = number_or(cfg, "planner", "keepout_margin", o.keepout_margin);
    return setup;
}

PlannedPair run_scvx_planner(const Scenario& sc) {
    ScvxSetup setup = build_scvx(sc);
    PlannedPair out;
    out.eps = setup.problem.eps;
    out.tracker_gains = finite_horizon_lqr(
        setup.problem.sys, setup.problem.Q, setup.problem.R,
        setup.problem.Qf.rows() == sc.sys.nx() ? setup.problem.Qf : setup.problem.Q,
        setup.problem.horizon);

    RendezvousProblem baseline = setup.problem;
    baseline.lambda_obs = 0.0;
    const ScvxResult nominal = solve_scvx(baseline, setup.opts);
    const ScvxResult aware = solve_scvx(setup.problem, setup.opts);

    out.nominal = nominal.trajectory;
    out.aware = aware.trajectory;
    out.nominal_report = nominal.observability;
    out.aware_report = aware.observability;
    out.scvx_report = aware.report;
    out.converged = nominal.report.converged && aware.report.converged;
    return out;
}

PlannedPair run_planner(const Scenario& sc) {
    const json& cfg = require(sc.config, "config", "planner");
    const std::string type = require(cfg, "planner", "type").get<std::string>();
    if (type == "deviation") return run_deviation_planner(sc);
    if (type == "scvx") return run_scvx_planner(sc);
    throw ConfigError("planner.type: unknown planner '" + type + "'");
}

struct EvaluationSetup {
    int runs = 1000;
    int threads = 1;
    Vector initial_offset;  // sized lazily
    std::optional<std::vector<std::complex<double>>> poles;
};

EvaluationSetup build_evaluation(const Scenario& sc) {
    EvaluationSetup ev;
    if (!sc.config.contains("evaluation")) return ev;
    const json& cfg = sc.config.at("evaluation");
    check_keys(cfg, "evaluation",
               {"runs", "observer", "initial_offset", "initial_offset_scale", "threads"});
    if (cfg.contains("runs")) ev.runs = integer(cfg.at("runs"), "evaluation.runs");
    if (ev.runs < 1) throw ConfigError("evaluation.runs: must be >= 1");
    if (cfg.contains("threads")) {
        ev.threads = integer(cfg.at("threads"), "evaluation.threads");
    }
    if (cfg.contains("initial_offset")) {
        ev.initial_offset = vector_of(cfg.at("initial_offset"), "evaluation.initial_offset");
    }
    if (cfg.contains("observer")) {
        const json& obs = cfg.at("observer");
        if (obs.is_string()) {
            if (obs.get<std::string>() != "riccati") {
                throw ConfigError("evaluation.observer: expected 'riccati' or pole array");
            }
        } else {
            const Vector poles = vector_of(obs, "evaluation.observer");
            std::vector<std::complex<double>> ps;
            for (int i = 0; i < poles.size(); ++i) ps.emplace_back(poles[i], 0.0);
            ev.poles = ps;
        }
    }
    return ev;
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& writer,
                std::ostream& diag) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file: " + path.string());
    writer(out);
    diag << "wrote " << path.string() << "\n";
}

int cmd_plan(const Scenario& sc, std::ostream& diag) {
    const PlannedPair pair = run_planner(sc);
    fs::create_directories(sc.out_dir);
    const std::string c = sc.comment();
    write_file(sc.out_dir / "nominal.csv",
               [&](std::ostream& o) { write_trajectory_csv(o, pair.nominal, c); }, diag);
    write_file(sc.out_dir / "aware.csv",
               [&](std::ostream& o) { write_trajectory_csv(o, pair.aware, c); }, diag);
    write_file(sc.out_dir / "obs_report.csv",
               [&](std::ostream& o) { write_observability_csv(o, pair.aware_report, c); },
               diag);
    write_file(sc.out_dir / "obs_nominal.csv",
               [&](std::ostream& o) { write_observability_csv(o, pair.nominal_report, c); },
               diag);
    if (pair.scvx_report) {
        write_file(sc.out_dir / "trajectory.csv",
                   [&](std::ostream& o) { write_trajectory_csv(o, pair.aware, c); }, diag);
        write_file(sc.out_dir / "scvx_report.csv",
                   [&](std::ostream& o) { write_scvx_report_csv(o, *pair.scvx_report, c); },
                   diag);
    }
    return pair.converged ? 0 : 3;
}

int cmd_simulate(const Scenario& sc, std::ostream& diag) {
    const PlannedPair pair = run_planner(sc);
    const EvaluationSetup ev = build_evaluation(sc);

    Observer observer = ev.poles ? design_observer_poles(sc.sys, *ev.poles)
                                 : design_observer_riccati(sc.sys);
    SimulationOptions opts;
    opts.threads = ev.threads;
    if (ev.initial_offset.size() == sc.sys.nx()) {
        opts.initial_offset = ev.initial_offset;
    } else {
        opts.initial_offset =
            pair.eps * Vector::Ones(sc.sys.nx()).normalized();
    }

    Rng rng_nominal(sc.seed);
    const EstimationStats nominal_stats =
        simulate_closed_loop(sc.sys, *sc.model, pair.nominal, observer,
                             pair.tracker_gains, ev.runs, rng_nominal, opts);
    Rng rng_aware(sc.seed);
    const EstimationStats aware_stats =
        simulate_closed_loop(sc.sys, *sc.model, pair.aware, observer,
                             pair.tracker_gains, ev.runs, rng_aware, opts);

    fs::create_directories(sc.out_dir);
    const std::string c = sc.comment();
    write_file(sc.out_dir / "stats_nominal.csv",
               [&](std::ostream& o) { write_stats_csv(o, nominal_stats, c); }, diag);
    write_file(sc.out_dir / "stats_aware.csv",
               [&](std::ostream& o) { write_stats_csv(o, aware_stats, c); }, diag);
    write_file(sc.out_dir / "obs_nominal.csv",
               [&](std::ostream& o) { write_observability_csv(o, pair.nominal_report, c); },
               diag);
    write_file(sc.out_dir / "obs_report.csv",
               [&](std::ostream& o) { write_observability_csv(o, pair.aware_report, c); },
               diag);
    diag << "converged variance nominal=" << format_double(nominal_stats.converged_variance)
         << " aware=" << format_double(aware_stats.converged_variance) << "\n";
    return pair.converged ? 0 : 3;
}

int cmd_validate_envelope(const Scenario& sc, std::ostream& diag) {
    ValidationGrid grid = default_grid();
    SyntheticErrorModel sampler;
    if (sc.config.contains("validation")) {
        const json& cfg = sc.config.at("validation");
        check_keys(cfg, "validation", {"grid", "error_model"});
        if (cfg.contains("grid")) {
            const json& g = cfg.at("grid");
            check_keys(g, "validation.grid",
                       {"ranges", "sun_angles", "rotations_per_angle", "radial_repeats"});
            if (g.contains("ranges")) {
                const Vector r = vector_of(g.at("ranges"), "validation.grid.ranges");
                grid.ranges_m.assign(r.data(), r.data() + r.size());
            }
            if (g.contains("sun_angles")) {
                const Vector a = vector_of(g.at("sun_angles"), "validation.grid.sun_angles");
                grid.sun_angles_deg.assign(a.data(), a.data() + a.size());
            }
            if (g.contains("rotations_per_angle")) {
                grid.rotations_per_angle =
                    integer(g.at("rotations_per_angle"), "validation.grid.rotations_per_angle");
            }
            if (g.contains("radial_repeats")) {
                grid.radial_repeats =
                    integer(g.at("radial_repeats"), "validation.grid.radial_repeats");
            }
        }
        if (cfg.contains("error_model")) {
            const json& e = cfg.at("error_model");
            check_keys(e, "validation.error_model", {"c0", "c1", "c2", "noise_amplitude"});
            sampler.c0 = number_or(e, "validation.error_model", "c0", sampler.c0);
            sampler.c1 = number_or(e, "validation.error_model", "c1", sampler.c1);
            sampler.c2 = number_or(e, "validation.error_model", "c2", sampler.c2);
            sampler.noise_amplitude =
                number_or(e, "validation.error_model", "noise_amplitude",
                          sampler.noise_amplitude);
        }
    }
    grid.validate();

    Rng rng(sc.seed);
    const EnvelopeFit fit = build_envelope(grid, sampler, rng);

    fs::create_directories(sc.out_dir);
    const std::string c = sc.comment();
    write_file(sc.out_dir / "dataset.csv",
               [&](std::ostream& o) { write_validation_dataset_csv(o, fit.dataset, c); },
               diag);
    write_file(sc.out_dir / "maxima.csv",
               [&](std::ostream& o) {
                   o << "# " << c << "\n";
                   o << "range_m,sun_angle_deg,max_error\n";
                   for (const auto& m : fit.maxima) {
                       o << format_double(m.range_m) << "," << format_double(m.sun_angle_deg)
                         << "," << format_double(m.max_error) << "\n";
                   }
               },
               diag);
    write_file(sc.out_dir / "envelope.csv",
               [&](std::ostream& o) {
                   o << "# " << c << "\n";
                   o << "feature,bucket,alpha,beta,gamma\n";
                   for (const auto& [range, env] : fit.per_range) {
                       o << "sun_angle_deg," << format_double(range) << ","
                         << format_double(env.alpha) << "," << format_double(env.beta) << ","
                         << format_double(env.gamma) << "\n";
                   }
                   if (fit.over_range) {
                       o << "range_m,all," << format_double(fit.over_range->alpha) << ","
                         << format_double(fit.over_range->beta) << ","
                         << format_double(fit.over_range->gamma) << "\n";
                   }
               },
               diag);
    return 0;
}

double csv_last_cumulative(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("report: missing input " + path.string());
    const CsvTable table = read_csv(in);
    const int col = table.column("cumulative");
    if (col < 0 || table.rows.empty()) {
        throw std::runtime_error("report: no cumulative column in " + path.string());
    }
    return table.rows.back()[col];
}

double csv_converged_variance(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("report: missing input " + path.string());
    const CsvTable table = read_csv(in);
    const int col = table.column("var_error_norm");
    if (col < 0 || table.rows.empty()) {
        throw std::runtime_error("report: no var_error_norm column in " + path.string());
    }
    const int n = static_cast<int>(table.rows.size());
    const int tail = std::max(1, n / 4);
    double sum = 0.0;
    for (int i = n - tail; i < n; ++i) sum += table.rows[i][col];
    return sum / tail;
}

int cmd_report(const Scenario& sc, std::ostream& diag) {
    const double obs_nominal = csv_last_cumulative(sc.out_dir / "obs_nominal.csv");
    const double obs_aware = csv_last_cumulative(sc.out_dir / "obs_report.csv");
    const double var_nominal = csv_converged_variance(sc.out_dir / "stats_nominal.csv");
    const double var_aware = csv_converged_variance(sc.out_dir / "stats_aware.csv");

    write_file(sc.out_dir / "comparison.csv",
               [&](std::ostream& o) {
                   o << "# " << sc.comment() << "\n";
                   o << "trajectory,observability_lb,converged_variance,variance_ratio\n";
                   o << "nominal," << format_double(obs_nominal) << ","
                     << format_double(var_nominal) << "," << format_double(1.0) << "\n";
                   o << "aware," << format_double(obs_aware) << ","
                     << format_double(var_aware) << ","
                     << format_double(var_aware / var_nominal) << "\n";
               },
               diag);
    diag << "variance ratio aware/nominal = " << format_double(var_aware / var_nominal)
         << "\n";
    return 0;
}

}  // namespace

int run_scenario(const std::string& command, const std::string& config_path,
                 const CliOverrides& overrides, std::ostream& diagnostics) {
    const bool needs_system = command == "plan-deviation" || command == "plan-scvx" ||
                              command == "simulate";
    const Scenario sc = load_scenario(config_path, overrides, needs_system);
    if (command == "plan-deviation") {
        const json& cfg = require(sc.config, "config", "planner");
        if (require(cfg, "planner", "type").get<std::string>() != "deviation") {
            throw ConfigError("plan-deviation requires planner.type == 'deviation'");
        }
        return cmd_plan(sc, diagnostics);
    }
    if (command == "plan-scvx") {
        const json& cfg = require(sc.config, "config", "planner");
        if (require(cfg, "planner", "type").get<std::string>() != "scvx") {
            throw ConfigError("plan-scvx requires planner.type == 'scvx'");
        }
        return cmd_plan(sc, diagnostics);
    }
    if (command == "simulate") return cmd_simulate(sc, diagnostics);
    if (command == "validate-envelope") return cmd_validate_envelope(sc, diagnostics);
    if (command == "report") return cmd_report(sc, diagnostics);
    throw ConfigError("unknown command: " + command);
}

}  // namespace obsplan
