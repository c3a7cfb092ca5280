#include "doctest.h"

#include <cmath>
#include <numbers>
#include <numeric>

#include "accretive/error.hpp"
#include "accretive/estimates.hpp"
#include "support.hpp"

using namespace accretive;
using testing::Gen;

namespace {

const double e = std::numbers::e;

OperatorPtr power_op(double alpha) {
    OperatorSpec s = testing::spec_of(OperatorKind::scalar_power);
    s.alpha = alpha;
    return make_operator(s);
}

State one(const OperatorPtr& A, double x) { return State(A->space(), {x}); }

Trajectory run(OperatorPtr A, const State& u0, double T, int steps, const Perturbation& F = Perturbation::zero()) {
    return evolve(A, F, u0, StepForcing::zero(A->space(), T), T, steps, SolverConfig{});
}

StepForcing scalar_step(std::vector<double> b, std::vector<double> levels) {
    auto s = uniform_space(1, 1.0);
    std::vector<State> p;
    for (double x : levels) p.push_back(State(s, {x}));
    return StepForcing(std::move(b), std::move(p));
}

const EstimateRecord* find(const EstimateReport& r, double t, double h, double q) {
    for (const auto& rec : r.records)
        if (std::abs(rec.t - t) < 1e-9 && std::abs(rec.h - h) < 1e-12 && rec.q == q) return &rec;
    return nullptr;
}

/// Exact rationals for the exponent oracle.
struct Rat {
    long long n, d;
    Rat(long long a = 0, long long b = 1) : n(a), d(b) { norm(); }
    void norm() {
        if (d < 0) n = -n, d = -d;
        const long long g = std::gcd(n < 0 ? -n : n, d);
        if (g > 1) n /= g, d /= g;
    }
    double value() const { return static_cast<double>(n) / static_cast<double>(d); }
};
Rat operator+(Rat a, Rat b) { return {a.n * b.d + b.n * a.d, a.d * b.d}; }
Rat operator-(Rat a, Rat b) { return {a.n * b.d - b.n * a.d, a.d * b.d}; }
Rat operator*(Rat a, Rat b) { return {a.n * b.n, a.d * b.d}; }
Rat operator/(Rat a, Rat b) { return {a.n * b.d, a.d * b.n}; }

struct RatExponents {
    Rat q0, alpha_q, beta_q, gamma_q, gamma_star;
};

/// The exponent chain in exact arithmetic for q0 = p (the non-critical branch).
RatExponents rational_exponents(Rat N, Rat p, Rat q) {
    const Rat one(1), two(2);
    const Rat q0 = p;
    const Rat D = (p - one) * q0 + (N - p) * (p - two);
    const Rat as = (N - p) / D;
    const Rat bs = ((two / p - one) * N + p - two / p) / D + one;
    const Rat gs = (p - one) * q0 / D;
    const Rat r = q * (N - p) / ((N - one) * q0);
    const Rat den = one - gs * (one - r);
    return {q0, as / den, (Rat(1, 2) * bs + gs * r) / den, gs * r / den, gs};
}

}  // namespace

TEST_CASE("gronwall_bound examples") {
    std::vector<double> s(1001), ones(1001), lin(1001);
    for (std::size_t k = 0; k < s.size(); ++k) {
        s[k] = k / 1000.0;
        ones[k] = 1.0;
        lin[k] = s[k];
    }
    CHECK(gronwall_bound(s, ones, 0.0, 1.0) == 1.0);
    CHECK(gronwall_bound(s, lin, 0.0, 0.5) == doctest::Approx(0.5));
    CHECK(gronwall_bound(s, ones, 1.0, 1.0) == doctest::Approx(e).epsilon(1e-6));
    CHECK(gronwall_bound(s, lin, 1.0, 1.0) == doctest::Approx(e - 1.0).epsilon(1e-6));
    CHECK(gronwall_bound(s, ones, 0.0, 0.7777) == 1.0);

    std::vector<double> few(s.begin(), s.begin() + 7), fa(7, 1.0);
    try {
        gronwall_bound(few, fa, 1.0, 0.006);
        FAIL("expected grid-too-coarse");
    } catch (const Error& err) {
        CHECK(err.kind() == ErrorKind::grid_too_coarse);
    }
}

TEST_CASE("ab_l1_rhs examples and quadrature oracle") {
    const auto s = uniform_space(1, 1.0);
    const auto zero = StepForcing::zero(s, 5.0);
    CHECK(ab_l1_rhs(2.0, 2.0, 0.0, 1.0, zero, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
    for (double alpha : {0.0, 0.5, 3.0})
        CHECK(ab_l1_rhs(0.7, alpha, 0.0, 1.3, zero, 2.0) ==
              doctest::Approx(2 * 1.3 / (std::abs(1 - alpha) * 0.7)).epsilon(1e-14));
    CHECK_THROWS_AS(ab_l1_rhs(1.0, 1.0, 0.0, 1.0, zero, 1.0), Error);

    // ω = 1, f = 0: (1/t)[a(t) + ∫_0^t a(s) e^{t-s} ds], a(s) = (1 + e^s)/|1-α|
    auto a = [](double x) { return 1.0 + std::exp(x); };
    const double oracle = a(1.0) + testing::simpson([&](double x) { return a(x) * std::exp(1.0 - x); }, 0.0, 1.0);
    CHECK(ab_l1_rhs(1.0, 2.0, 1.0, 1.0, zero, 1.0) == doctest::Approx(oracle).epsilon(1e-9));

    // one jump, ω = 0.5: nested Simpson with pieces split at the breakpoint
    const auto f = scalar_step({0.0, 0.4, 2.0}, {0.3, -0.8});
    const double omega = 0.5, alpha = 3.0, u0 = 0.6, t = 1.5;
    auto fnorm = [&](double r) { return r < 0.4 ? 0.3 : 0.8; };
    auto piecewise = [&](const std::function<double(double)>& g, double lo, double hi) {
        // the left piece stops just short of the jump so it sees the left limit
        if (hi <= 0.4 || lo >= 0.4) return testing::simpson(g, lo, hi, 200);
        return testing::simpson(g, lo, 0.4 * (1 - 1e-15), 200) + testing::simpson(g, 0.4, hi, 200);
    };
    auto a_omega = [&](double x) {
        const double v0 = x >= 0.4 ? 0.4 * 1.1 : 0.0;
        const double i1 = piecewise(fnorm, 0.0, x);
        const double i2 = piecewise([&](double r) { return (x - r) * std::exp(-omega * r) * fnorm(r); }, 0.0, x);
        return v0 + ((1 + std::exp(omega * x)) * u0 + i1 + omega * i2) / std::abs(1 - alpha);
    };
    const double nested =
        (a_omega(t) + omega * piecewise([&](double x) { return a_omega(x) * std::exp(omega * (t - x)); }, 0.0, t)) / t;
    CHECK(ab_l1_rhs(t, alpha, omega, u0, f, 1.0) == doctest::Approx(nested).epsilon(1e-6));
}

TEST_CASE("ab_l1_rhs is nonincreasing in t without forcing or growth") {
    const auto zero = StepForcing::zero(uniform_space(1, 1.0), 10.0);
    double prev = kInfinity;
    for (int k = 1; k <= 100; ++k) {
        const double v = ab_l1_rhs(0.1 * k, 2.0, 0.0, 1.0, zero, 1.0);
        CHECK(v <= prev);
        prev = v;
    }
}

TEST_CASE("ab_finite_h_rhs examples and Riemann oracle") {
    const auto s = uniform_space(1, 1.0);
    const auto zero = StepForcing::zero(s, 5.0);
    CHECK(ab_finite_h_rhs(1.0, 1.0, 2.0, 0.0, 1.0, 1.0, zero, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
    // h → 0: rhs / h → 2 L e^{ωt} ||u0|| / (|1-α| t), first order in h
    const double limit = 2 * 1.5 * std::exp(0.3 * 0.8) * 0.9 / (std::abs(1 - 0.5) * 0.8);
    double prev_err = kInfinity;
    for (double h : {1e-2, 1e-3, 1e-4}) {
        const double err = std::abs(ab_finite_h_rhs(0.8, h, 0.5, 0.3, 1.5, 0.9, zero, 2.0) / h - limit) / limit;
        CHECK(err <= 2 * h);
        CHECK(err < prev_err);
        prev_err = err;
    }
    CHECK_THROWS_AS(ab_finite_h_rhs(1.0, 0.0, 2.0, 0.0, 1.0, 1.0, zero, 1.0), Error);
    CHECK_THROWS_AS(ab_finite_h_rhs(1.0, 0.1, 1.0, 0.0, 1.0, 1.0, zero, 1.0), Error);

    // step forcing with one jump, midpoint Riemann sums at 1e4 points
    const auto f = scalar_step({0.0, 0.9, 3.0}, {0.5, -0.25});
    for (double omega : {0.0, 0.7}) {
        const double t = 1.2, h = 0.3, alpha = 2.0, L = 1.0, u0 = 0.4;
        const double lam = 1 + h / t, kappa = std::pow(lam, 1 / (1 - alpha));
        const int n = 10000;
        double i1 = 0, i2 = 0, i3 = 0;
        for (int k = 0; k < n; ++k) {
            const double x = (k + 0.5) * t / n, dx = t / n;
            const double w = std::exp(omega * (t - x));
            i1 += w * std::abs(f.at(lam * x)[0]) * dx;
            i2 += w * std::abs(f.at(lam * x)[0] - f.at(x)[0]) * dx;
            i3 += std::exp(-omega * x) * std::abs(f.at(x)[0]) * dx;
        }
        const double riemann = std::abs(lam - kappa) * L * i1 + kappa * L * i2 +
                               L * std::exp(omega * t) * std::abs(kappa - 1) * (2 * u0 + i3);
        CHECK(ab_finite_h_rhs(t, h, alpha, omega, L, u0, f, 1.0) == doctest::Approx(riemann).epsilon(1e-3));
    }
}

TEST_CASE("check_ab_l1 on closed-form flows") {
    SolverConfig cfg;
    const std::vector<double> qs{1.0, 2.0, kInfinity};
    auto A = power_op(2.0);
    const auto tr = run(A, one(A, 1.0), 2.0, 2000);
    const std::vector<double> hs{0.1, 0.01, 0.001};
    const auto rep = check_ab_l1(tr, qs, hs, cfg);
    CHECK(rep.pass);
    const auto* r = find(rep, 1.0, 0.1, 1.0);
    REQUIRE(r != nullptr);
    CHECK(r->lhs == doctest::Approx(0.2381).epsilon(1e-3));
    CHECK(r->severity == Severity::hard);
    for (const auto& rec : rep.records)
        if (rec.severity != Severity::info) CHECK(rec.pass);

    auto S = make_operator(testing::spec_of(OperatorKind::zero_order_sign, 1));
    const auto sign = run(S, State(S->space(), {1.0}), 2.0, 200);
    CHECK(sign.at(0.5)[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(sign.states.back()[0] == 0.0);
    const std::vector<double> h1{0.1};
    const auto srep = check_ab_l1(sign, qs, h1, cfg);
    CHECK(srep.pass);
    const auto* sr = find(srep, 0.5, 0.1, 1.0);
    REQUIRE(sr != nullptr);
    // unit-speed decay, measured in the grid's L¹ norm
    CHECK(sr->lhs == doctest::Approx(S->space()->weights[0]).epsilon(1e-9));

    auto P = make_operator(testing::spec_of(OperatorKind::porous_medium_1d, 8));
    const auto flat = run(P, State::zeros(P->space()), 0.5, 50);
    const auto frep = check_ab_l1(flat, qs, h1, cfg);
    CHECK(frep.pass);
    for (const auto& rec : frep.records) CHECK(rec.lhs == 0.0);
}

TEST_CASE("check_ab_l1 hard records pass on forced and perturbed runs") {
    Gen g(71);
    SolverConfig cfg;
    const std::vector<double> qs{1.0, 2.0, kInfinity};
    const std::vector<double> hs{0.1, 0.01};
    for (auto kind : {OperatorKind::plaplacian_1d, OperatorKind::porous_medium_1d, OperatorKind::zero_order_sign}) {
        auto A = make_operator(testing::spec_of(kind, 12));
        const auto f = g.forcing(A->space(), 1.0, 3, 0.5);
        const auto tr = evolve(A, Perturbation::scaled_arctan(0.5), g.state(A->space(), -1, 1), f, 1.0, 100, cfg);
        const auto rep = check_ab_l1(tr, qs, hs, cfg);
        for (const auto& rec : rep.records)
            if (rec.severity == Severity::hard) CHECK(rec.pass);
    }
}

TEST_CASE("check_pointwise_ab") {
    SolverConfig cfg;
    auto A = power_op(2.0);
    const auto tr = run(A, one(A, 1.0), 2.0, 2000);
    const std::vector<double> ts{1.0};
    const std::vector<double> hs{0.5};
    const auto rep = check_pointwise_ab(tr, ts, hs, cfg);
    CHECK(rep.pass);
    const auto* r = find(rep, 1.0, 0.5, kInfinity);
    REQUIRE(r != nullptr);
    // violation = rhs - lhs with lhs ≈ -0.2 and rhs = -1/3
    CHECK(r->lhs == doctest::Approx(-1.0 / 3.0 + 0.2).epsilon(2e-3));
    CHECK(r->lhs < 0.0);

    auto P = make_operator(testing::spec_of(OperatorKind::porous_medium_1d, 64));
    Gen g(72);
    State bump = State::zeros(P->space());
    for (std::size_t i = 20; i < 44; ++i) bump[i] = g.uniform(0.5, 1.0);
    const auto pm = run(P, bump, 0.2, 400);
    const std::vector<double> hs2{0.01, 0.05};
    CHECK(check_pointwise_ab(pm, {}, hs2, cfg).pass);

    const auto flat = run(P, State::zeros(P->space()), 0.2, 20);
    const auto frep = check_pointwise_ab(flat, {}, hs2, cfg);
    CHECK(frep.pass);

    State neg = bump;
    neg[3] = -0.1;
    try {
        check_pointwise_ab(run(P, neg, 0.1, 10), {}, hs2, cfg);
        FAIL("expected negative-initial-data");
    } catch (const Error& err) {
        CHECK(err.kind() == ErrorKind::negative_initial_data);
    }
}

TEST_CASE("check_contraction") {
    SolverConfig cfg;
    const std::vector<double> qs{1.0, 2.0, kInfinity};
    auto A = power_op(2.0);
    const auto a = run(A, one(A, 1.0), 2.0, 400);
    CHECK(check_contraction(a, a, qs, cfg).pass);
    const auto b = run(A, one(A, 2.0), 2.0, 400);
    const auto rep = check_contraction(a, b, qs, cfg);
    CHECK(rep.pass);
    for (std::size_t k = 1; k < a.times.size(); ++k) {
        const double t = a.times[k];
        CHECK(std::abs(a.states[k][0] - b.states[k][0]) == doctest::Approx(2 / (1 + 2 * t) - 1 / (1 + t)).epsilon(2e-2));
    }

    const auto F = Perturbation::linear(-0.25);
    const auto pa = run(A, one(A, 1.0), 2.0, 400, F), pb = run(A, one(A, 0.1), 2.0, 400, F);
    CHECK(check_contraction(pa, pb, qs, cfg).pass);

    Gen g(73);
    auto P = make_operator(testing::spec_of(OperatorKind::plaplacian_1d, 16));
    const auto f = g.forcing(P->space(), 1.0, 3, 0.5);
    const auto G = Perturbation::scaled_arctan(0.6);
    const auto u = evolve(P, G, g.state(P->space()), f, 1.0, 60, cfg);
    const auto v = evolve(P, G, g.state(P->space()), f, 1.0, 60, cfg);
    CHECK(check_contraction(u, v, qs, cfg).pass);
}

TEST_CASE("check_complete_regularity") {
    SolverConfig cfg;
    const std::vector<double> qs{1.0, 2.0, kInfinity};
    auto P = make_operator(testing::spec_of(OperatorKind::porous_medium_1d, 32));
    CHECK(check_complete_regularity(run(P, State::zeros(P->space()), 1.0, 50), qs, cfg).pass);

    auto A = power_op(2.0);
    const auto tr = run(A, one(A, 1.0), 1.0, 1000);
    CHECK(std::abs(difference_quotient(tr, 0.999, 0.001)[0]) == doctest::Approx(0.25).epsilon(2e-3));
    CHECK(check_complete_regularity(tr, qs, cfg).pass);

    State bump = State::zeros(P->space());
    for (std::size_t i = 8; i < 24; ++i) bump[i] = 1.0 - std::abs(i - 15.5) / 8.0;
    CHECK(check_complete_regularity(run(P, bump, 1.0, 1000), qs, cfg).pass);
}

TEST_CASE("trajectory scaling") {
    SolverConfig cfg;
    auto P = make_operator(testing::spec_of(OperatorKind::porous_medium_1d, 16));
    Gen g(74);
    const auto f = g.forcing(P->space(), 1.0, 2, 0.3);
    const auto tr = evolve(P, Perturbation::zero(), g.state(P->space(), 0, 1), f, 1.0, 100, cfg);
    const auto rep = check_trajectory_scaling(tr, 2.0, cfg);
    CHECK(rep.pass);
    CHECK_FALSE(rep.records.empty());
}

TEST_CASE("smoothing exponents against an exact rational oracle") {
    const auto ex = smoothing_exponents(3, 2.5, 2.0);
    const auto rat = rational_exponents(Rat(3), Rat(5, 2), Rat(2));
    CHECK(rat.q0.value() == 2.5);
    CHECK(rat.alpha_q.value() == 0.5);
    CHECK(rat.gamma_q.value() == 0.75);
    CHECK(rat.beta_q.value() == doctest::Approx(3.3).epsilon(1e-15));
    CHECK(std::abs(ex.q0 - rat.q0.value()) <= 1e-12);
    CHECK(std::abs(ex.alpha_q - rat.alpha_q.value()) <= 1e-12);
    CHECK(std::abs(ex.beta_q - rat.beta_q.value()) <= 1e-12);
    CHECK(std::abs(ex.gamma_q - rat.gamma_q.value()) <= 1e-12);
    CHECK_FALSE(ex.q0_from_critical);

    // q at the upper endpoint: γ_q = γ*
    const auto up = smoothing_exponents(3, 2.5, 10.0);
    CHECK(up.q_upper == doctest::Approx(10.0).epsilon(1e-15));
    CHECK(std::abs(up.gamma_q - up.gamma_star) <= 1e-12);
    const auto rup = rational_exponents(Rat(3), Rat(5, 2), Rat(10));
    CHECK(rup.gamma_q.n == rup.gamma_star.n);
    CHECK(rup.gamma_q.d == rup.gamma_star.d);

    // γ_q → γ* as q approaches the endpoint
    double prev = kInfinity;
    for (double q : {2.0, 5.0, 8.0, 9.9, 9.99}) {
        const double gap = std::abs(smoothing_exponents(3, 2.5, q).gamma_q - up.gamma_star);
        CHECK(gap < prev);
        prev = gap;
    }

    // rational grid: other admissible (N, p, q) on the non-critical branch
    for (int N : {3, 4, 5}) {
        for (Rat p : {Rat(5, 2), Rat(3), Rat(7, 2)}) {
            if (p.value() >= N) continue;
            for (Rat q : {Rat(1), Rat(2), Rat(3)}) {
                const auto x = smoothing_exponents(N, p.value(), q.value());
                const auto y = rational_exponents(Rat(N), p, q);
                CHECK(std::abs(x.alpha_q - y.alpha_q.value()) <= 1e-12);
                CHECK(std::abs(x.beta_q - y.beta_q.value()) <= 1e-12);
                CHECK(std::abs(x.gamma_q - y.gamma_q.value()) <= 1e-12);
            }
        }
    }

    CHECK_THROWS_AS(smoothing_exponents(2, 2.5, 2.0), Error);
    CHECK_THROWS_AS(smoothing_exponents(3, 2.0, 2.0), Error);
    try {
        smoothing_exponents(3, 2.5, 10.5);
        FAIL("expected q-out-of-window");
    } catch (const Error& err) {
        CHECK(err.kind() == ErrorKind::q_out_of_window);
    }
    // N = 2, p <= 4/3: q0 sits just above the critical value and the window
    // shrinks to (q_lower, q_lower (1 + 1e-6)]
    const auto crit = smoothing_exponents(2, 1.2, 4.0 * (1 + 5e-7));
    CHECK(crit.q0_from_critical);
    CHECK(crit.q0 > (2 - 1.2) * (2 - 1.2) / 0.2);
    CHECK(crit.q_upper == doctest::Approx(crit.q_lower).epsilon(2e-6));
    CHECK_THROWS_AS(smoothing_exponents(2, 1.2, 3.0), Error);
    const auto mid = smoothing_exponents(2, 1.5, 2.0);
    CHECK_FALSE(mid.q0_from_critical);
    CHECK(mid.q_upper == doctest::Approx(3.0));
}

TEST_CASE("smoothing check rejects ScalarPower and fits exact power laws") {
    SolverConfig cfg;
    auto A = power_op(2.0);
    const std::vector<Trajectory> fam{run(A, one(A, 1.0), 0.2, 100)};
    try {
        check_lq_linfty_smoothing(fam, 2.0, cfg);
        FAIL("expected kind-unsupported");
    } catch (const Error& err) {
        CHECK(err.kind() == ErrorKind::kind_unsupported);
    }
    std::vector<double> x, y;
    for (int k = 1; k <= 10; ++k) {
        x.push_back(0.01 * k);
        y.push_back(3.0 * std::pow(x.back(), -1.5));
    }
    CHECK(loglog_slope(x, y) == doctest::Approx(-1.5).epsilon(1e-12));
    y[0] = 0.0;
    CHECK_THROWS_AS(loglog_slope(x, y), Error);
}

TEST_CASE("checkers are deterministic") {
    SolverConfig cfg;
    Gen g(75);
    auto P = make_operator(testing::spec_of(OperatorKind::porous_medium_1d, 24));
    const auto f = g.forcing(P->space(), 1.0, 2, 0.3);
    const State u0 = g.state(P->space(), 0, 1);
    const auto a = evolve(P, Perturbation::zero(), u0, f, 1.0, 100, cfg);
    const auto b = evolve(P, Perturbation::zero(), u0, f, 1.0, 100, cfg);
    const std::vector<double> qs{1.0, kInfinity};
    const std::vector<double> hs{0.1, 0.01};
    const auto ra = check_ab_l1(a, qs, hs, cfg), rb = check_ab_l1(b, qs, hs, cfg);
    REQUIRE(ra.records.size() == rb.records.size());
    for (std::size_t i = 0; i < ra.records.size(); ++i) {
        CHECK(ra.records[i].lhs == rb.records[i].lhs);
        CHECK(ra.records[i].rhs == rb.records[i].rhs);
    }
}

TEST_CASE("report bookkeeping") {
    EstimateReport r;
    r.check_id = "x";
    r.finalize();
    CHECK_FALSE(r.pass);
    r.add_info(1.0, 0.1, 1.0, 5.0, 1.0);
    r.add_hard(1.0, 0.1, 1.0, 0.5, 1.0);
    r.add_soft(1.0, 0.1, 1.0, 1.04, 1.0, 0.05);
    r.finalize();
    CHECK(r.pass);
    CHECK(r.min_margin(Severity::hard) == doctest::Approx(0.5));
    r.add_soft(1.0, 0.1, 1.0, 1.06, 1.0, 0.05);
    r.finalize();
    CHECK_FALSE(r.pass);
    CHECK(relative_margin(0.0, 0.0) == 0.0);
    CHECK(parse_severity(to_string(Severity::soft)) == Severity::soft);
}
