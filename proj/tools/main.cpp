#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "obsplan/scenario.hpp"

int main(int argc, char** argv) {
    CLI::App app{"obsplan: estimation-aware trajectory planning under set-valued "
                 "measurement uncertainty"};
    app.require_subcommand(1);

    std::string config_path;
    obsplan::CliOverrides overrides;
    std::uint64_t seed = 0;
    std::string out_dir;
    int runs = 0;
    double lambda_obs = 0.0;

    const std::vector<std::string> commands = {"plan-deviation", "plan-scvx", "simulate",
                                               "validate-envelope", "report"};
    for (const std::string& name : commands) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "scenario config (JSON)")->required();
        sub->add_option("--seed", seed, "override the config seed");
        sub->add_option("--out", out_dir, "override the output directory");
        sub->add_option("--runs", runs, "override the Monte Carlo run count");
        sub->add_option("--lambda-obs", lambda_obs, "override the observability weight");
    }

    CLI11_PARSE(app, argc, argv);
    CLI::App* sub = app.get_subcommands().front();
    if (sub->count("--seed") > 0) overrides.seed = seed;
    if (sub->count("--out") > 0) overrides.out_dir = out_dir;
    if (sub->count("--runs") > 0) overrides.runs = runs;
    if (sub->count("--lambda-obs") > 0) overrides.lambda_obs = lambda_obs;

    try {
        return obsplan::run_scenario(sub->get_name(), config_path, overrides, std::cout);
    } catch (const obsplan::ConfigError& err) {
        std::cerr << "config error: " << err.what() << "\n";
        return 2;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
}
