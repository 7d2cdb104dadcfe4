#include "obsplan/io.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace obsplan {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

void write_comment(std::ostream& out, const std::string& comment) {
    if (!comment.empty()) out << "# " << comment << "\n";
}

}  // namespace

void write_trajectory_csv(std::ostream& out, const Trajectory& traj,
                          const std::string& comment) {
    traj.validate();
    write_comment(out, comment);
    const int nx = traj.states.empty() ? 0 : static_cast<int>(traj.states[0].size());
    const int nu = traj.inputs.empty() ? 0 : static_cast<int>(traj.inputs[0].size());
    out << "t";
    for (int i = 0; i < nx; ++i) out << ",x" << i;
    for (int i = 0; i < nu; ++i) out << ",u" << i;
    out << "\n";
    for (std::size_t t = 0; t < traj.states.size(); ++t) {
        out << t;
        for (int i = 0; i < nx; ++i) out << "," << format_double(traj.states[t][i]);
        for (int i = 0; i < nu; ++i) {
            out << ",";
            if (t < traj.inputs.size()) out << format_double(traj.inputs[t][i]);
        }
        out << "\n";
    }
}

void write_observability_csv(std::ostream& out, const ObservabilityReport& report,
                             const std::string& comment) {
    write_comment(out, comment);
    out << "t,T1,T2,cumulative\n";
    double cumulative = 0.0;
    for (const auto& step : report.per_step) {
        cumulative += step.t1 + step.t2;
        out << step.t << "," << format_double(step.t1) << "," << format_double(step.t2)
            << "," << format_double(cumulative) << "\n";
    }
}

void write_stats_csv(std::ostream& out, const EstimationStats& stats,
                     const std::string& comment) {
    write_comment(out, comment);
    const int nx =
        stats.state_variance.empty() ? 0 : static_cast<int>(stats.state_variance[0].size());
    out << "step,mean_error_norm,var_error_norm";
    for (int i = 0; i < nx; ++i) out << ",var_x" << i;
    out << "\n";
    for (std::size_t t = 0; t < stats.mean_error_norm.size(); ++t) {
        out << t << "," << format_double(stats.mean_error_norm[t]) << ","
            << format_double(stats.var_error_norm[t]);
        for (int i = 0; i < nx; ++i) {
            out << "," << format_double(stats.state_variance[t][i]);
        }
        out << "\n";
    }
}

void write_scvx_report_csv(std::ostream& out, const ScvxReport& report,
                           const std::string& comment) {
    write_comment(out, comment);
    out << "iter,nonlinear_cost,linearized_cost,ratio,trust_radius,max_slack,accepted\n";
    for (const auto& log : report.iterations) {
        out << log.iter << "," << format_double(log.nonlinear_cost) << ","
            << format_double(log.linearized_cost) << "," << format_double(log.ratio) << ","
            << format_double(log.trust_radius) << "," << format_double(log.max_slack) << ","
            << (log.accepted ? 1 : 0) << "\n";
    }
}

void write_validation_dataset_csv(std::ostream& out,
                                  const std::vector<ValidationSample>& samples,
                                  const std::string& comment) {
    write_comment(out, comment);
    out << "range_m,sun_angle_deg,rotation_id,error_norm\n";
    for (const auto& s : samples) {
        out << format_double(s.range_m) << "," << format_double(s.sun_angle_deg) << ","
            << s.rotation_id << "," << format_double(s.error_norm) << "\n";
    }
}

std::vector<ValidationSample> read_validation_dataset_csv(std::istream& in) {
    const CsvTable table = read_csv(in);
    const int rc = table.column("range_m");
    const int ac = table.column("sun_angle_deg");
    const int ic = table.column("rotation_id");
    const int ec = table.column("error_norm");
    if (rc < 0 || ac < 0 || ic < 0 || ec < 0) {
        throw std::runtime_error("validation dataset: missing required columns");
    }
    std::vector<ValidationSample> samples;
    samples.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        ValidationSample s;
        s.range_m = row[rc];
        s.sun_angle_deg = row[ac];
        s.rotation_id = static_cast<int>(row[ic]);
        s.error_norm = row[ec];
        samples.push_back(s);
    }
    return samples;
}

int CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (columns[i] == name) return static_cast<int>(i);
    }
    return -1;
}

CsvTable read_csv(std::istream& in) {
    CsvTable table;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.push_back("");
        if (!have_header) {
            table.columns = cells;
            have_header = true;
            continue;
        }
        std::vector<double> row(table.columns.size(),
                                std::numeric_limits<double>::quiet_NaN());
        for (std::size_t i = 0; i < cells.size() && i < row.size(); ++i) {
            if (!cells[i].empty()) row[i] = std::strtod(cells[i].c_str(), nullptr);
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

}  // namespace obsplan
