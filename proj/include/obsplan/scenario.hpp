#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

namespace obsplan {

/// Configuration problems map to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CliOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<int> runs;
    std::optional<double> lambda_obs;
};

/// Runs one subcommand (`plan-deviation`, `plan-scvx`, `simulate`,
/// `validate-envelope`, `report`) against a JSON scenario config.
/// Returns the process exit code: 0 success, 2 config error, 3 solver
/// non-convergence. Artifact CSVs land in the scenario output directory; all
/// carry the effective-config hash in their header.
int run_scenario(const std::string& command, const std::string& config_path,
                 const CliOverrides& overrides, std::ostream& diagnostics);

}  // namespace obsplan
