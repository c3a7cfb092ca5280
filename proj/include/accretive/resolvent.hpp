#pragma once

#include "accretive/core.hpp"
#include "accretive/operators.hpp"

namespace accretive {

struct ResolventResult {
    State u;
    /// L²(μ) norm of (u - v)/λ + A(u) - f at the returned u.
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// J_λ v = (I + λA)^{-1} v. `guess`, when given, seeds the iterative solvers.
/// Throws SolverFailure when the tolerance is not reached.
ResolventResult resolve(const OperatorInstance& A, double lambda, const State& v, const SolverConfig& cfg,
                        const State* guess = nullptr);

/// Resolvent of A - f for a constant f: resolve(A, λ, v + λ f).
ResolventResult resolve_shifted(const OperatorInstance& A, const State& f, double lambda, const State& v,
                                const SolverConfig& cfg, const State* guess = nullptr);

/// Resolvent of A + F by the fixed point u ← J_λ(v - λ F(u)); needs λω < 1.
ResolventResult resolve_perturbed(const OperatorInstance& A, const Perturbation& F, double lambda, const State& v,
                                  const SolverConfig& cfg, const State* guess = nullptr);

struct ScalingCheck {
    State lhs;  ///< λ^{1/(α-1)} J^{A-f}_{λμ} v
    State rhs;  ///< J^{A - λ^{α/(α-1)} f}_μ [λ^{1/(α-1)} v]
    double discrepancy = 0.0;  ///< relative L²(μ) distance
    double tolerance = 0.0;
    bool pass = false;
};

/// Homogeneity identity for resolvents of an order-α operator (α ≠ 1).
/// Closed-form kinds pass at 1e-6 relative, iterative kinds at 10 tol_resolvent.
ScalingCheck check_resolvent_scaling(const OperatorInstance& A, double lambda, double mu, const State& v,
                                     const State& f, const SolverConfig& cfg);

bool has_closed_form_resolvent(OperatorKind kind);

}  // namespace accretive
