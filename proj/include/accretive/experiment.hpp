#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "accretive/core.hpp"
#include "accretive/estimates.hpp"
#include "accretive/operators.hpp"
#include "accretive/semigroup.hpp"

namespace accretive {

/// Initial data on the operator's nodes. Positions are normalized to [0, 1]:
/// x for 1D grids, (x, y) for 2D, θ / 2π on the DtN boundary.
struct InitialSpec {
    std::string preset = "bump";  ///< bump | constant | random | indicator
    double amplitude = 1.0;
    double center = 0.5;
    double width = 0.25;  ///< bump half-width
    double lo = 0.25;     ///< indicator support
    double hi = 0.75;
    bool signed_values = false;  ///< random values in [-a, a] instead of [0, a]
    double offset = 0.0;
};

/// Constant-in-space plateaus; `plateaus`, when present, gives nodal values instead.
struct ForcingSpec {
    std::vector<double> breakpoints;  ///< empty means [0, horizon]
    std::vector<double> levels;       ///< empty means zero forcing
    std::vector<std::vector<double>> plateaus;
};

struct ExperimentConfig {
    std::string name = "experiment";
    OperatorSpec op;
    Perturbation perturbation;
    InitialSpec initial;
    ForcingSpec forcing;
    double horizon = 1.0;
    int steps = 100;  ///< implicit steps per forcing plateau
    std::vector<double> h_sweep{1e-1, 1e-2, 1e-3};
    std::vector<double> qs{1.0, 2.0, kInfinity};
    std::vector<std::string> checks;
    SolverConfig solver;
    std::uint64_t seed = 0;
    std::string output = "out";
    double scaling_lambda = 2.0;
    double pair_offset = 0.1;  ///< contraction partner: u0 + pair_offset · random nonnegative
    double smoothing_q = 2.0;
    SmoothingWindow window;
    int resolvent_samples = 20;
};

/// Check names understood by the runner.
const std::vector<std::string>& known_checks();
const std::vector<std::string>& preset_names();
ExperimentConfig preset_config(const std::string& name);

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::filesystem::path& path);
/// FNV-1a of the canonical config JSON, hex encoded.
std::string config_hash(const ExperimentConfig& cfg);

State make_initial(const InitialSpec& spec, const OperatorInstance& op, std::uint64_t seed);
StepForcing make_forcing(const ForcingSpec& spec, const OperatorInstance& op, double horizon);

/// √m I₁(√m R) / I₀(√m R): the p = 2 DtN response to constant boundary data.
double dtn_bessel_oracle(double m, double radius);

struct RunOutcome {
    std::vector<EstimateReport> reports;
    nlohmann::json summary;
    int exit_code = 0;  ///< 0 pass, 1 check failure, 2 configuration error, 3 solver failure
};

/// Evolves the trajectories the configured checks need and writes them to dir.
void simulate(const ExperimentConfig& cfg, const std::filesystem::path& dir);
/// Runs the configured checks on trajectories stored in dir; throws no-input
/// when a trajectory check finds nothing to read.
std::vector<EstimateReport> verify(const ExperimentConfig& cfg, const std::filesystem::path& dir);
/// simulate + verify + artifacts; never throws, errors map to exit codes.
RunOutcome run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& dir);
RunOutcome verify_directory(const ExperimentConfig& cfg, const std::filesystem::path& dir);

/// Writes report.csv, plot.csv and summary.json into dir.
nlohmann::json write_artifacts(const std::vector<EstimateReport>& reports, const std::filesystem::path& dir);

}  // namespace accretive
