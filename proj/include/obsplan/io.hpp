#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "obsplan/dynamics.hpp"
#include "obsplan/estimation.hpp"
#include "obsplan/observability.hpp"
#include "obsplan/planner_scvx.hpp"
#include "obsplan/validation.hpp"

namespace obsplan {

/// Shortest representation that round-trips a double exactly.
std::string format_double(double v);

/// Writers emit an optional leading "# ..." comment line, then a header row,
/// then data rows. All numbers round-trip exactly.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj,
                          const std::string& comment = "");
void write_observability_csv(std::ostream& out, const ObservabilityReport& report,
                             const std::string& comment = "");
void write_stats_csv(std::ostream& out, const EstimationStats& stats,
                     const std::string& comment = "");
void write_scvx_report_csv(std::ostream& out, const ScvxReport& report,
                           const std::string& comment = "");
void write_validation_dataset_csv(std::ostream& out,
                                  const std::vector<ValidationSample>& samples,
                                  const std::string& comment = "");
std::vector<ValidationSample> read_validation_dataset_csv(std::istream& in);

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;  // blank cells become NaN

    int column(const std::string& name) const;  // -1 when absent
};

/// Reads a CSV written by this module; leading '#' lines are skipped.
CsvTable read_csv(std::istream& in);

}  // namespace obsplan
