#pragma once

// Hand-rolled generators and independent oracles shared by the test binaries.

#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

#include "accretive/core.hpp"
#include "accretive/operators.hpp"

namespace testing {

using namespace accretive;

class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    bool coin() { return integer(0, 1) == 1; }

    SpacePtr space(std::size_t n, double lo = 0.1, double hi = 2.0) {
        std::vector<double> w(n);
        for (auto& x : w) x = uniform(lo, hi);
        return make_space(std::move(w));
    }

    State state(const SpacePtr& s, double lo = -1.0, double hi = 1.0) {
        std::vector<double> v(s->size());
        for (auto& x : v) x = uniform(lo, hi);
        return State(s, std::move(v));
    }

    /// Step forcing on [0, T] with `intervals` plateaus of random values.
    StepForcing forcing(const SpacePtr& s, double T, int intervals, double amp) {
        std::vector<double> b{0.0};
        for (int i = 1; i < intervals; ++i) b.push_back(T * (i + uniform(-0.3, 0.3)) / intervals);
        b.push_back(T);
        std::vector<State> p;
        for (int i = 0; i < intervals; ++i) p.push_back(state(s, -amp, amp));
        return StepForcing(std::move(b), std::move(p));
    }

    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

/// Root of g on [lo, hi] with g(lo) <= 0 <= g(hi), by plain bisection.
inline double bisect(const std::function<double(double)>& g, double lo, double hi) {
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) <= 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

/// Composite Simpson rule with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 2000) {
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

/// Radial shooting for u'' + u'/r = m u with u(0) = 1, u'(0) = 0, by RK4
/// started from the series u ≈ 1 + m r²/4. Returns {u(R), u'(R)}.
inline std::pair<double, double> radial_shoot(double m, double R, int steps = 20000) {
    const double r0 = 1e-4;
    double r = r0, u = 1.0 + m * r0 * r0 / 4.0, du = m * r0 / 2.0;
    const double h = (R - r0) / steps;
    auto rhs = [m](double rr, double uu, double dd) { return std::pair{dd, m * uu - dd / rr}; };
    for (int i = 0; i < steps; ++i) {
        auto [k1u, k1d] = rhs(r, u, du);
        auto [k2u, k2d] = rhs(r + h / 2, u + h / 2 * k1u, du + h / 2 * k1d);
        auto [k3u, k3d] = rhs(r + h / 2, u + h / 2 * k2u, du + h / 2 * k2d);
        auto [k4u, k4d] = rhs(r + h, u + h * k3u, du + h * k3d);
        u += h / 6 * (k1u + 2 * k2u + 2 * k3u + k4u);
        du += h / 6 * (k1d + 2 * k2d + 2 * k3d + k4d);
        r += h;
    }
    return {u, du};
}

/// ∫[u-k]^+ and ∫[u+k]^- evaluated directly.
inline std::pair<double, double> truncated(const State& u, double k) {
    double pos = 0.0, neg = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        pos += u.space->weights[i] * std::max(u[i] - k, 0.0);
        neg += u.space->weights[i] * std::max(-(u[i] + k), 0.0);
    }
    return {pos, neg};
}

/// Brute-force u ≪ v on a dense uniform k grid plus every node value.
inline bool dominated_bruteforce(const State& u, const State& v, double slack) {
    std::vector<double> ks{0.0};
    double top = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        ks.push_back(std::abs(u[i]));
        ks.push_back(std::abs(v[i]));
        top = std::max({top, std::abs(u[i]), std::abs(v[i])});
    }
    for (int j = 1; j <= 4000; ++j) ks.push_back(top * j / 4000.0);
    for (double k : ks) {
        auto [pu, nu] = truncated(u, k);
        auto [pv, nv] = truncated(v, k);
        const double floor = 1e-12 * (1.0 + top);
        if (pu > (1 + slack) * pv + floor || nu > (1 + slack) * nv + floor) return false;
    }
    return true;
}

inline double max_abs_diff(const State& a, const State& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline OperatorSpec spec_of(OperatorKind kind, std::size_t n = 16) {
    OperatorSpec s;
    s.kind = kind;
    switch (kind) {
        case OperatorKind::scalar_power: s.alpha = 2.0; s.n = 1; break;
        case OperatorKind::plaplacian_1d: s.p = 3.0; s.n = n; break;
        case OperatorKind::plaplacian_2d: s.p = 3.0; s.n = std::max<std::size_t>(2, n / 4); break;
        case OperatorKind::porous_medium_1d: s.m = 2.0; s.n = n; break;
        case OperatorKind::zero_order_sign: s.n = n; break;
        case OperatorKind::dirichlet_to_neumann: s.p = 3.0; s.m = 1.0; s.mesh = {6, 12, 1.0}; break;
    }
    return s;
}

inline const std::vector<OperatorKind>& grid_kinds() {
    static const std::vector<OperatorKind> k{OperatorKind::scalar_power, OperatorKind::plaplacian_1d,
                                             OperatorKind::plaplacian_2d, OperatorKind::porous_medium_1d,
                                             OperatorKind::zero_order_sign};
    return k;
}

}  // namespace testing
