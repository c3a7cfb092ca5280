#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "accretive/core.hpp"
#include "accretive/semigroup.hpp"

namespace accretive {

/// hard: must hold up to the stated absolute slack; soft: within margin_eps;
/// info: reported only.
enum class Severity { hard, soft, info };

std::string_view to_string(Severity s);
Severity parse_severity(std::string_view s);

struct EstimateRecord {
    double t = 0.0;
    double h = 0.0;
    double q = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0;  ///< (rhs - lhs) / max(|rhs|, tiny)
    bool pass = true;
    Severity severity = Severity::hard;
};

struct EstimateReport {
    std::string check_id;
    std::vector<std::pair<std::string, std::string>> inputs;
    std::vector<EstimateRecord> records;
    std::vector<std::string> notes;
    bool pass = true;
    bool skipped = false;

    void add_hard(double t, double h, double q, double lhs, double rhs);
    void add_soft(double t, double h, double q, double lhs, double rhs, double eps);
    void add_info(double t, double h, double q, double lhs, double rhs);
    void add_input(std::string key, double value);
    void add_input(std::string key, std::string value);
    /// pass = every non-info record passes (and at least one record exists
    /// unless the check was skipped).
    void finalize();
    /// Smallest margin over records of the given severity (inf if none).
    double min_margin(Severity s) const;
};

double relative_margin(double lhs, double rhs);

/// a(t) + ∫_0^t a(s) b e^{b(t-s)} ds by the trapezoid rule on the samples
/// (s_k, a_k) with s_k <= t; at least 8 samples are required.
double gronwall_bound(std::span<const double> s, std::span<const double> a, double b, double t);

/// Limit (h → 0) bound on ||du/dt(t)||_q for the perturbed problem:
/// (1/t)[a_ω(t) + ω ∫_0^t a_ω(s) e^{ω(t-s)} ds] with
/// a_ω(t) = V_0(f,t) + |1-α|^{-1}[(1 + e^{ωt})||u0|| + ∫_0^t||f|| + ω∫_0^t∫_0^s e^{-ωr}||f(r)|| dr ds].
double ab_l1_rhs(double t, double alpha, double omega, double u0_norm, const StepForcing& f, double q);

/// Finite-h bound on ||u(t+h) - u(t)||_q for T with Lipschitz constant L and
/// quasi-contractivity ω; integrals are exact for step forcing.
double ab_finite_h_rhs(double t, double h, double alpha, double omega, double L, double u0_norm,
                       const StepForcing& f, double q);

/// Recorded times (t > 0) with t + h also recorded; at most `max_samples`,
/// evenly thinned, when max_samples > 0.
std::vector<double> sample_times(const Trajectory& traj, double h, std::size_t max_samples = 0);

EstimateReport check_ab_l1(const Trajectory& traj, std::span<const double> qs, std::span<const double> h_sweep,
                           const SolverConfig& cfg);

/// Nodewise one-sided bound (α > 1: lower, α < 1: upper) for u0 >= 0. With a
/// perturbation or forcing the violation is bounded in norm by the forcing
/// defect. `probe`, when given, is a run from larger data used to confirm order
/// preservation; otherwise one is evolved here.
EstimateReport check_pointwise_ab(const Trajectory& traj, std::span<const double> ts, std::span<const double> hs,
                                  const SolverConfig& cfg, const Trajectory* probe = nullptr);

/// Order-preserving run from u0 + shift, used by check_pointwise_ab.
Trajectory order_probe(const Trajectory& traj);

EstimateReport check_contraction(const Trajectory& a, const Trajectory& b, std::span<const double> qs,
                                 const SolverConfig& cfg);

EstimateReport check_complete_regularity(const Trajectory& traj, std::span<const double> qs,
                                         const SolverConfig& cfg);

/// Independently evolves the rescaled data and compares with rescale_trajectory.
EstimateReport check_trajectory_scaling(const Trajectory& traj, double lambda, const SolverConfig& cfg,
                                        const Trajectory* scaled_run = nullptr);
Trajectory scaled_run(const Trajectory& traj, double lambda);

struct SmoothingExponents {
    double q0 = 0.0;
    double alpha_q = 0.0;
    double beta_q = 0.0;
    double gamma_q = 0.0;
    double alpha_star = 0.0;
    double beta_star = 0.0;
    double gamma_star = 0.0;
    double q_upper = 0.0;  ///< (N-1) q0 / (N-p)
    double q_lower = 0.0;  ///< (2-p)(N-1)/(p-1), exclusive
    bool q0_from_critical = false;
};

SmoothingExponents smoothing_exponents(int N, double p, double q);

struct SmoothingWindow {
    double t_lo = 0.01;
    double t_hi = 0.1;
    std::size_t samples = 24;
};

/// Small-time rate checks. PorousMedium1D: ||du/dt||_1 ≤ 2||u0||_1/(|m-1|t) and a
/// log-log slope of -1 (±15% or ±0.1). DtN (N = 2, admissible p): slopes of
/// ||u||_∞ and ||du/dt||_∞ must not fall below -α_q and -(α_q+1); other p are
/// skipped. ScalarPower is rejected.
EstimateReport check_lq_linfty_smoothing(std::span<const Trajectory> family, double q, const SolverConfig& cfg,
                                         const SmoothingWindow& window = {});

/// Least-squares slope of log y against log x.
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace accretive
