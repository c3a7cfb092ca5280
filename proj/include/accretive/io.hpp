#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "accretive/core.hpp"
#include "accretive/estimates.hpp"
#include "accretive/operators.hpp"
#include "accretive/semigroup.hpp"

namespace accretive::io {

using json = nlohmann::json;
namespace fs = std::filesystem;

json to_json(const State& u);
/// Reuses `space` when its weights match the stored ones.
State state_from_json(const json& j, const SpacePtr& space = nullptr);

json to_json(const StepForcing& f);
StepForcing forcing_from_json(const json& j, const SpacePtr& space = nullptr);

json to_json(const OperatorSpec& spec);
OperatorSpec operator_spec_from_json(const json& j);

json to_json(const Perturbation& F);
Perturbation perturbation_from_json(const json& j);

json to_json(const SolverConfig& cfg);
SolverConfig solver_config_from_json(const json& j);

json read_json(const fs::path& path);
void write_json(const fs::path& path, const json& j);

/// node_index, weight, value
void write_state_csv(const fs::path& path, const State& u);
State read_state_csv(const fs::path& path);

/// t, node_0, ..., node_{n-1}
void write_trajectory_csv(const fs::path& path, const Trajectory& traj);
struct TrajectoryTable {
    std::vector<double> times;
    std::vector<std::vector<double>> rows;
};
TrajectoryTable read_trajectory_csv(const fs::path& path);

/// Everything needed to rebuild the trajectory, including step diagnostics.
json to_json(const Trajectory& traj, const std::string& config_hash = {});
Trajectory trajectory_from_json(const json& j);
void write_trajectory_json(const fs::path& path, const Trajectory& traj, const std::string& config_hash = {});
Trajectory read_trajectory_json(const fs::path& path);

struct ReportRow {
    std::string check_id;
    EstimateRecord record;
};

/// check_id, t, h, q, lhs, rhs, margin, pass, severity
void write_report_csv(const fs::path& path, const std::vector<EstimateReport>& reports);
std::vector<ReportRow> read_report_csv(const fs::path& path);

/// Long format for plotting: check_id, series, t, h, q, value (series is lhs or rhs).
void write_plot_csv(const fs::path& path, const std::vector<EstimateReport>& reports);
struct PlotRow {
    std::string check_id;
    std::string series;
    double t = 0.0, h = 0.0, q = 0.0, value = 0.0;
};
std::vector<PlotRow> read_plot_csv(const fs::path& path);

json summary_json(const std::vector<EstimateReport>& reports);

/// Resolvent diagnostics: op, kind, lambda, residual, iterations, pass
struct ResolventRow {
    std::string op;
    std::string kind;
    double lambda = 0.0;
    double residual = 0.0;
    int iterations = 0;
    bool pass = false;
};
void write_resolvent_csv(const fs::path& path, const std::vector<ResolventRow>& rows);
std::vector<ResolventRow> read_resolvent_csv(const fs::path& path);

/// Shortest round-trip text for a double; "inf", "-inf", "nan" for the rest.
std::string format_double(double x);
double parse_double(const std::string& s);

}  // namespace accretive::io
