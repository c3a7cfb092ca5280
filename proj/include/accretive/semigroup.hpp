#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "accretive/core.hpp"
#include "accretive/operators.hpp"
#include "accretive/resolvent.hpp"

namespace accretive {

struct StepDiagnostics {
    std::size_t interval = 0;
    std::size_t substep = 0;
    double dt = 0.0;
    double residual = 0.0;
    int iterations = 0;
};

/// Implicit-Euler mild solution: every substep is recorded.
struct Trajectory {
    OperatorPtr op;
    Perturbation perturbation;
    StepForcing forcing;
    SolverConfig cfg;
    int steps_per_interval = 0;
    std::string label;

    std::vector<double> times;
    std::vector<State> states;
    std::vector<StepDiagnostics> steps;  ///< steps[k] produced states[k + 1]

    const State& initial() const { return states.front(); }
    double horizon() const { return times.back(); }
    double alpha() const { return op->alpha(); }

    /// Index of a recorded time within `tol`, if any.
    std::optional<std::size_t> find_time(double t, double tol = 1e-12) const;
    /// Linear interpolation between recorded states; exact at recorded times.
    State at(double t) const;
    /// Forcing seen by the unperturbed operator: f - F(u_{k+1}) on substep k.
    StepForcing effective_forcing() const;
    /// Σ_k dt_k · residual_k, a bound on the accumulated solver error in L²(μ).
    double accumulated_solver_error(double up_to = kInfinity) const;
};

/// [J_{t/n}]^n u0 (Crandall–Liggett product).
State exponential_formula(const OperatorInstance& A, const State& u0, double t, int n, const SolverConfig& cfg);

/// n_per_interval implicit steps on every forcing plateau up to T.
Trajectory evolve(OperatorPtr A, const Perturbation& F, const State& u0, const StepForcing& f, double T,
                  int n_per_interval, const SolverConfig& cfg);

/// v(t) = λ^{1/(α-1)} u(λt) on the times t_j / λ, with the matching data
/// λ^{1/(α-1)} u0 and λ^{α/(α-1)} f(λ·) stored in the metadata.
Trajectory rescale_trajectory(const Trajectory& traj, double lambda);

/// (u(t + h) - u(t)) / h from the recorded states.
State difference_quotient(const Trajectory& traj, double t, double h);

}  // namespace accretive
