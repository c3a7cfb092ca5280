#include "accretive/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "accretive/error.hpp"
#include "accretive/kernels.hpp"

namespace accretive {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::invalid_argument: return "invalid-argument";
        case ErrorKind::invalid_exponent: return "invalid-exponent";
        case ErrorKind::space_mismatch: return "space-mismatch";
        case ErrorKind::out_of_range: return "out-of-range";
        case ErrorKind::multivalued_at_point: return "multivalued-at-point";
        case ErrorKind::kind_unsupported: return "kind-unsupported";
        case ErrorKind::solver_failure: return "solver-failure";
        case ErrorKind::step_too_large: return "step-too-large";
        case ErrorKind::fixedpoint_stall: return "fixedpoint-stall";
        case ErrorKind::unsupported_order: return "unsupported-order";
        case ErrorKind::grid_too_coarse: return "grid-too-coarse";
        case ErrorKind::negative_initial_data: return "negative-initial-data";
        case ErrorKind::q_out_of_window: return "q-out-of-window";
        case ErrorKind::config_parse: return "config-parse";
        case ErrorKind::no_input: return "no-input";
    }
    return "unknown";
}

double WeightedSpace::total_weight() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
}

SpacePtr make_space(std::vector<double> weights, std::string label) {
    if (weights.empty()) throw Error(ErrorKind::invalid_argument, "weighted space needs at least one node");
    for (double w : weights) {
        if (!(w > 0.0) || !std::isfinite(w))
            throw Error(ErrorKind::invalid_argument, "weights must be finite and strictly positive");
    }
    auto s = std::make_shared<WeightedSpace>();
    s->weights = std::move(weights);
    s->label = std::move(label);
    return s;
}

SpacePtr uniform_space(std::size_t n, double weight, std::string label) {
    return make_space(std::vector<double>(n, weight), std::move(label));
}

bool same_space(const SpacePtr& a, const SpacePtr& b) {
    if (!a || !b) return false;
    return a == b || a->weights == b->weights;
}

void require_same_space(const SpacePtr& a, const SpacePtr& b, const char* where) {
    if (!same_space(a, b)) throw Error(ErrorKind::space_mismatch, where);
}

State::State(SpacePtr s, std::vector<double> v) : space(std::move(s)), values(std::move(v)) {
    if (!space) throw Error(ErrorKind::invalid_argument, "state without a space");
    if (values.size() != space->size())
        throw Error(ErrorKind::space_mismatch, "state length differs from the node count");
    for (double x : values) {
        if (!std::isfinite(x)) throw Error(ErrorKind::invalid_argument, "state values must be finite");
    }
}

State State::zeros(SpacePtr s) { return constant(std::move(s), 0.0); }

State State::constant(SpacePtr s, double c) {
    const std::size_t n = s->size();
    return State(std::move(s), std::vector<double>(n, c));
}

namespace {

template <class Op>
State zip(const State& a, const State& b, Op op, const char* where) {
    require_same_space(a.space, b.space, where);
    State out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.values[i] = op(a.values[i], b.values[i]);
    return out;
}

template <class Op>
State map(const State& a, Op op) {
    State out = a;
    for (double& x : out.values) x = op(x);
    return out;
}

}  // namespace

State operator+(const State& a, const State& b) {
    return zip(a, b, [](double x, double y) { return x + y; }, "state addition");
}

State operator-(const State& a, const State& b) {
    return zip(a, b, [](double x, double y) { return x - y; }, "state subtraction");
}

State operator*(double c, const State& a) {
    return map(a, [c](double x) { return c * x; });
}

State abs(const State& a) {
    return map(a, [](double x) { return std::abs(x); });
}

State positive_part(const State& a) {
    return map(a, [](double x) { return x > 0.0 ? x : 0.0; });
}

State negative_part(const State& a) {
    return map(a, [](double x) { return x < 0.0 ? -x : 0.0; });
}

double lq_norm(std::span<const double> values, std::span<const double> weights, double q) {
    if (std::isnan(q) || q < 1.0) {
        std::ostringstream os;
        os << "norm exponent must be >= 1, got " << q;
        throw Error(ErrorKind::invalid_exponent, os.str());
    }
    if (values.size() != weights.size()) throw Error(ErrorKind::space_mismatch, "norm: length mismatch");
    if (std::isinf(q)) return kernels::max_abs(values);
    const double s = kernels::weighted_power_sum(values, weights, q);
    if (q == 1.0) return s;
    if (q == 2.0) return std::sqrt(s);
    return std::pow(s, 1.0 / q);
}

double lq_norm(const State& u, double q) { return lq_norm(u.values, u.space->weights, q); }

DominanceResult completely_dominated(const State& u, const State& v, double rel_slack, int k_samples) {
    require_same_space(u.space, v.space, "complete dominance");
    const auto& w = u.space->weights;

    std::vector<double> k{0.0};
    for (double x : u.values) k.push_back(std::abs(x));
    for (double x : v.values) k.push_back(std::abs(x));
    const double top = std::max(kernels::max_abs(u.values), kernels::max_abs(v.values));
    const int samples = std::max(k_samples, 2);
    if (top > 0.0) {
        for (int j = 0; j < samples; ++j) {
            const double e = -6.0 + 6.0 * static_cast<double>(j) / (samples - 1);
            k.push_back(top * std::pow(10.0, e));
        }
    }
    std::sort(k.begin(), k.end());
    k.erase(std::unique(k.begin(), k.end()), k.end());

    const std::size_t nk = k.size();
    std::vector<double> pu(nk), nu(nk), pv(nk), nv(nk);
    kernels::threshold_integrals(u.values, w, k, pu, nu);
    kernels::threshold_integrals(v.values, w, k, pv, nv);

    // absorbs summation roundoff when u and v agree to the last bit
    const double floor = 1e-13 * u.space->total_weight() * std::max(top, 1e-300);

    DominanceResult r;
    r.thresholds_checked = nk;
    r.worst_excess = -kInfinity;
    auto consider = [&](double lhs, double rhs, double kk, DominanceSide side) {
        const double excess = lhs - (1.0 + rel_slack) * rhs;
        if (excess > r.worst_excess) {
            r.worst_excess = excess;
            r.worst_k = kk;
            r.worst_side = side;
            r.worst_lhs = lhs;
            r.worst_rhs = rhs;
        }
    };
    for (std::size_t j = 0; j < nk; ++j) {
        consider(pu[j], pv[j], k[j], DominanceSide::positive);
        consider(nu[j], nv[j], k[j], DominanceSide::negative);
    }
    r.dominated = r.worst_excess <= floor;
    return r;
}

DominanceResult completely_dominated(const State& u, const State& v, const SolverConfig& cfg) {
    return completely_dominated(u, v, cfg.margin_eps, cfg.k_samples);
}

StepForcing::StepForcing(std::vector<double> breakpoints, std::vector<State> plateaus)
    : breakpoints_(std::move(breakpoints)), plateaus_(std::move(plateaus)) {
    if (plateaus_.empty() || breakpoints_.size() != plateaus_.size() + 1)
        throw Error(ErrorKind::invalid_argument, "forcing needs N plateaus and N+1 breakpoints");
    if (breakpoints_.front() != 0.0) throw Error(ErrorKind::invalid_argument, "forcing must start at t = 0");
    for (std::size_t i = 1; i < breakpoints_.size(); ++i) {
        if (!(breakpoints_[i] > breakpoints_[i - 1]) || !std::isfinite(breakpoints_[i]))
            throw Error(ErrorKind::invalid_argument, "forcing breakpoints must be strictly increasing");
    }
    for (const auto& s : plateaus_) require_same_space(plateaus_.front().space, s.space, "forcing plateaus");
}

StepForcing StepForcing::zero(SpacePtr space, double horizon) {
    return StepForcing({0.0, horizon}, {State::zeros(std::move(space))});
}

StepForcing StepForcing::constant(const State& value, double horizon) {
    return StepForcing({0.0, horizon}, {value});
}

std::size_t StepForcing::interval_at(double t) const {
    // first i with t <= t_{i+1}
    auto it = std::lower_bound(breakpoints_.begin() + 1, breakpoints_.end(), t);
    if (it == breakpoints_.end()) return plateaus_.size() - 1;
    return static_cast<std::size_t>(it - breakpoints_.begin() - 1);
}

double StepForcing::jump_norm(std::size_t i, double q) const {
    if (i == 0 || i >= plateaus_.size()) throw Error(ErrorKind::out_of_range, "jump index");
    return lq_norm(plateaus_[i] - plateaus_[i - 1], q);
}

StepForcing StepForcing::shifted(double shift) const {
    if (!(shift >= 0.0) || !(shift < horizon())) throw Error(ErrorKind::out_of_range, "forcing shift");
    std::vector<double> b{0.0};
    std::vector<State> p;
    for (std::size_t i = 0; i < plateaus_.size(); ++i) {
        if (breakpoints_[i + 1] <= shift) continue;
        b.push_back(breakpoints_[i + 1] - shift);
        p.push_back(plateaus_[i]);
    }
    return StepForcing(std::move(b), std::move(p));
}

StepForcing StepForcing::rescaled(double c, double lambda) const {
    if (!(lambda > 0.0)) throw Error(ErrorKind::invalid_argument, "time scale must be positive");
    std::vector<double> b;
    for (double t : breakpoints_) b.push_back(t / lambda);
    std::vector<State> p;
    for (const auto& s : plateaus_) p.push_back(c * s);
    return StepForcing(std::move(b), std::move(p));
}

bool StepForcing::is_identically_zero() const {
    for (const auto& s : plateaus_)
        for (double x : s.values)
            if (x != 0.0) return false;
    return true;
}

namespace {

void require_time(const StepForcing& f, double t) {
    if (!(t > 0.0) || t > f.horizon()) {
        std::ostringstream os;
        os << "t = " << t << " outside (0, " << f.horizon() << "]";
        throw Error(ErrorKind::out_of_range, os.str());
    }
}

}  // namespace

double total_variation(const StepForcing& f, double t, double q) {
    require_time(f, t);
    double v = 0.0;
    const auto& b = f.breakpoints();
    for (std::size_t i = 1; i < f.interval_count(); ++i) {
        if (b[i] < t) v += f.jump_norm(i, q);
    }
    return v;
}

double v_omega(const StepForcing& f, double t, double omega, double q) {
    require_time(f, t);
    double v = 0.0;
    const auto& b = f.breakpoints();
    for (std::size_t i = 1; i < f.interval_count(); ++i) {
        if (b[i] <= t) v += b[i] * std::exp(-omega * b[i]) * f.jump_norm(i, q);
    }
    return v;
}

double v_omega_at(const StepForcing& f, double t, double omega, double q, double h) {
    require_time(f, t);
    if (!(h > 0.0)) throw Error(ErrorKind::invalid_argument, "h must be positive");
    // s ↦ (f(s), f(s + hs)) is constant between the points t_i and t_i / (1 + h)
    std::vector<double> cuts{0.0, t};
    for (double b : f.breakpoints()) {
        if (b > 0.0 && b < t) cuts.push_back(b);
        const double c = b / (1.0 + h);
        if (c > 0.0 && c < t) cuts.push_back(c);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    double total = 0.0;
    for (std::size_t j = 0; j + 1 < cuts.size(); ++j) {
        const double a = cuts[j], b = cuts[j + 1];
        const double mid = 0.5 * (a + b);
        const std::size_t i0 = f.interval_at(mid);
        const std::size_t i1 = f.interval_at(mid * (1.0 + h));
        if (i0 == i1) continue;
        const double jump = lq_norm(f.plateaus()[i1] - f.plateaus()[i0], q);
        const double weight = omega == 0.0 ? (b - a) : (std::exp(-omega * a) - std::exp(-omega * b)) / omega;
        total += weight * jump / h;
    }
    return total;
}

}  // namespace accretive
