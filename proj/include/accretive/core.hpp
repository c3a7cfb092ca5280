#pragma once

#include <cstddef>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace accretive {

/// Exponent marker for the sup norm.
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Finite node set with strictly positive quadrature weights.
struct WeightedSpace {
    std::vector<double> weights;
    std::string label;

    std::size_t size() const { return weights.size(); }
    double total_weight() const;
};

using SpacePtr = std::shared_ptr<const WeightedSpace>;

SpacePtr make_space(std::vector<double> weights, std::string label = {});
SpacePtr uniform_space(std::size_t n, double weight, std::string label = {});

/// Same object, or identical weight vectors.
bool same_space(const SpacePtr& a, const SpacePtr& b);
void require_same_space(const SpacePtr& a, const SpacePtr& b, const char* where);

/// Vector of nodal values attached to a weighted space.
struct State {
    SpacePtr space;
    std::vector<double> values;

    State() = default;
    State(SpacePtr s, std::vector<double> v);

    static State zeros(SpacePtr s);
    static State constant(SpacePtr s, double c);

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
    double& operator[](std::size_t i) { return values[i]; }
};

State operator+(const State& a, const State& b);
State operator-(const State& a, const State& b);
State operator*(double c, const State& a);
State abs(const State& a);
State positive_part(const State& a);
/// [u]^- = max(-u, 0), so u = u^+ - u^-.
State negative_part(const State& a);

struct SolverConfig {
    double tol_resolvent = 1e-10;
    int max_newton_iters = 200;
    int max_fixedpoint_iters = 1000;
    double tol_fixedpoint = 1e-12;
    int cl_steps = 1000;
    double margin_eps = 0.05;
    int k_samples = 64;
};

/// Weighted L^q norm; q = kInfinity gives the max norm.
double lq_norm(const State& u, double q);
double lq_norm(std::span<const double> values, std::span<const double> weights, double q);

enum class DominanceSide { positive, negative };

struct DominanceResult {
    bool dominated = true;
    /// Largest violation found, measured as lhs - (1 + eps) rhs.
    double worst_excess = 0.0;
    double worst_k = 0.0;
    DominanceSide worst_side = DominanceSide::positive;
    double worst_lhs = 0.0;
    double worst_rhs = 0.0;
    std::size_t thresholds_checked = 0;
};

/// Tests u ≪ v: for every k >= 0, ∫[u-k]^+ <= ∫[v-k]^+ and ∫[u+k]^- <= ∫[v+k]^-.
/// The threshold set contains every node value of |u| and |v| (where the
/// integrals change slope), so the test is exact up to the relative slack
/// `rel_slack`.
DominanceResult completely_dominated(const State& u, const State& v, double rel_slack, int k_samples = 64);
DominanceResult completely_dominated(const State& u, const State& v, const SolverConfig& cfg);

/// Right-open step forcing: plateau i is active on (t_{i}, t_{i+1}].
class StepForcing {
public:
    StepForcing() = default;
    StepForcing(std::vector<double> breakpoints, std::vector<State> plateaus);

    static StepForcing zero(SpacePtr space, double horizon);
    static StepForcing constant(const State& value, double horizon);

    const std::vector<double>& breakpoints() const { return breakpoints_; }
    const std::vector<State>& plateaus() const { return plateaus_; }
    const SpacePtr& space() const { return plateaus_.front().space; }
    double horizon() const { return breakpoints_.back(); }
    std::size_t interval_count() const { return plateaus_.size(); }

    /// Plateau active at t. t = 0 maps to the first plateau and t beyond the
    /// horizon to the last one (constant extension).
    std::size_t interval_at(double t) const;
    const State& at(double t) const { return plateaus_[interval_at(t)]; }

    /// Norm of the jump at interior breakpoint i (1 <= i < interval_count()).
    double jump_norm(std::size_t i, double q) const;

    /// s ↦ f(s + shift), restricted to [0, horizon - shift].
    StepForcing shifted(double shift) const;
    /// s ↦ c f(lambda s) on [0, horizon / lambda].
    StepForcing rescaled(double c, double lambda) const;

    bool is_identically_zero() const;

private:
    std::vector<double> breakpoints_;
    std::vector<State> plateaus_;
};

/// Total variation of f on [0, t] in the L^q norm. A jump at t_i counts once
/// t > t_i, which keeps ||f(t) - f(s)|| <= V(t) - V(s) valid at breakpoints.
double total_variation(const StepForcing& f, double t, double q);

/// lim_{h→0} ∫_0^t e^{-ωs} ||f(s + hs) - f(s)||_q / h ds, exact for step forcing:
/// Σ_{t_i <= t} t_i e^{-ω t_i} ||jump_i||_q.
double v_omega(const StepForcing& f, double t, double omega, double q);

/// Same integral at a finite h, integrated exactly piece by piece.
double v_omega_at(const StepForcing& f, double t, double omega, double q, double h);

}  // namespace accretive
