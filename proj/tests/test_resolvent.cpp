#include "doctest.h"

#include <cmath>

#include "accretive/error.hpp"
#include "accretive/resolvent.hpp"
#include "support.hpp"

using namespace accretive;
using testing::Gen;

namespace {

State scalar(const OperatorInstance& A, double x) { return State(A.space(), {x}); }

std::vector<OperatorPtr> catalog(std::size_t n = 12) {
    std::vector<OperatorPtr> ops;
    for (auto kind : testing::grid_kinds()) ops.push_back(make_operator(testing::spec_of(kind, n)));
    ops.push_back(make_operator(testing::spec_of(OperatorKind::dirichlet_to_neumann)));
    return ops;
}

}  // namespace

TEST_CASE("resolve of zero data is zero") {
    SolverConfig cfg;
    for (const auto& A : catalog()) {
        const auto r = resolve(*A, 0.7, State::zeros(A->space()), cfg);
        CHECK(r.converged);
        CHECK(lq_norm(r.u, kInfinity) == 0.0);
    }
}

TEST_CASE("resolve examples against a bisection oracle") {
    SolverConfig cfg;
    OperatorSpec pm;
    pm.kind = OperatorKind::porous_medium_1d;
    pm.m = 2.0;
    pm.n = 1;
    pm.h_x = 1.0;
    auto P = make_operator(pm);
    const double root = testing::bisect([](double u) { return u + 2 * u * u - 3; }, 0, 3);
    CHECK(root == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(resolve(*P, 1.0, State(P->space(), {3.0}), cfg).u[0] == doctest::Approx(root).epsilon(1e-9));

    auto S = make_operator(testing::spec_of(OperatorKind::zero_order_sign, 3));
    const auto r = resolve(*S, 0.3, State(S->space(), {1.0, 0.2, -0.5}), cfg).u;
    CHECK(r[0] == doctest::Approx(0.7));
    CHECK(r[1] == 0.0);
    CHECK(r[2] == doctest::Approx(-0.2));
    CHECK(resolve(*S, 0.3, State(S->space(), {0.3, -0.3, 0.0}), cfg).u.values == std::vector<double>{0, 0, 0});

    auto A = make_operator(testing::spec_of(OperatorKind::scalar_power));
    CHECK(resolve_shifted(*A, scalar(*A, 2.0), 1.0, scalar(*A, 0.0), cfg).u[0] == doctest::Approx(1.0).epsilon(1e-10));
    const auto base = resolve(*A, 0.4, scalar(*A, 1.3), cfg);
    CHECK(resolve_shifted(*A, scalar(*A, 0.0), 0.4, scalar(*A, 1.3), cfg).u[0] == base.u[0]);
    const double shifted = testing::bisect([](double u) { return u + 0.4 * (u * std::abs(u) - 0.7) - 1.3; }, -5, 5);
    CHECK(resolve_shifted(*A, scalar(*A, 0.7), 0.4, scalar(*A, 1.3), cfg).u[0] == doctest::Approx(shifted).epsilon(1e-10));
}

TEST_CASE("resolve reaches the residual tolerance on random data") {
    Gen g(51);
    SolverConfig cfg;
    for (const auto& A : catalog(24)) {
        for (int trial = 0; trial < 5; ++trial) {
            const auto r = resolve(*A, g.uniform(0.01, 5.0), g.state(A->space(), -2, 2), cfg);
            CHECK(r.converged);
            CHECK(r.residual <= cfg.tol_resolvent);
        }
    }
}

TEST_CASE("resolvents are complete contractions and order preserving") {
    Gen g(52);
    SolverConfig cfg;
    for (const auto& A : catalog()) {
        for (int trial = 0; trial < 15; ++trial) {
            const double lambda = g.uniform(0.05, 3.0);
            const State v = g.state(A->space(), -2, 2);
            State w = g.state(A->space(), -2, 2);
            const auto ru = resolve(*A, lambda, v, cfg), rw = resolve(*A, lambda, w, cfg);
            const double slack = 1e-8 + 2 * lambda * cfg.tol_resolvent;
            for (double q : {1.0, 2.0, kInfinity})
                CHECK(lq_norm(ru.u - rw.u, q) <= lq_norm(v - w, q) + slack / std::sqrt(A->space()->weights[0]));
            CHECK(completely_dominated(ru.u - rw.u, v - w, cfg.margin_eps).dominated);

            State hi = v;
            for (std::size_t i = 0; i < hi.size(); ++i) hi[i] = v[i] + g.uniform(0.0, 0.5);
            const auto rh = resolve(*A, lambda, hi, cfg);
            for (std::size_t i = 0; i < hi.size(); ++i) CHECK(ru.u[i] <= rh.u[i] + 1e-8);
        }
    }
}

TEST_CASE("perturbed resolvent") {
    SolverConfig cfg;
    auto A = make_operator(testing::spec_of(OperatorKind::scalar_power));
    const auto same = resolve_perturbed(*A, Perturbation::zero(), 0.6, scalar(*A, 1.7), cfg);
    CHECK(same.u[0] == resolve(*A, 0.6, scalar(*A, 1.7), cfg).u[0]);
    CHECK(resolve_perturbed(*A, Perturbation::linear(0.5), 1.0, scalar(*A, 2.5), cfg).u[0] ==
          doctest::Approx(1.0).epsilon(1e-9));
    try {
        resolve_perturbed(*A, Perturbation::linear(1.5), 1.0, scalar(*A, 1.0), cfg);
        FAIL("expected step-too-large");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::step_too_large);
    }

    Gen g(53);
    for (auto kind : {OperatorKind::plaplacian_1d, OperatorKind::porous_medium_1d, OperatorKind::zero_order_sign}) {
        auto B = make_operator(testing::spec_of(kind, 16));
        for (const auto& F : {Perturbation::linear(-0.8), Perturbation::scaled_arctan(0.9)}) {
            for (int trial = 0; trial < 10; ++trial) {
                const double lambda = g.uniform(0.05, 0.9 / F.omega());
                const State v = g.state(B->space(), -1, 1), w = g.state(B->space(), -1, 1);
                const auto a = resolve_perturbed(*B, F, lambda, v, cfg);
                const auto b = resolve_perturbed(*B, F, lambda, w, cfg);
                CHECK((1 - lambda * F.omega()) * lq_norm(a.u - b.u, 2.0) <= lq_norm(v - w, 2.0) + 1e-8);
                // inclusion residual checked against an independent evaluation
                if (kind != OperatorKind::zero_order_sign) {
                    const State res = (1.0 / lambda) * (a.u - v) + B->apply(a.u) + nemytskii(F, a.u);
                    CHECK(lq_norm(res, 2.0) <= 1e-7);
                }
            }
        }
    }
}

TEST_CASE("resolvent scaling identity") {
    SolverConfig cfg;
    auto A = make_operator(testing::spec_of(OperatorKind::scalar_power));
    const auto ex = check_resolvent_scaling(*A, 4.0, 1.0, scalar(*A, 3.0), scalar(*A, 0.0), cfg);
    CHECK(ex.lhs[0] == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(ex.rhs[0] == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(ex.pass);
    const auto id = check_resolvent_scaling(*A, 1.0, 0.3, scalar(*A, 0.8), scalar(*A, 0.2), cfg);
    CHECK(id.discrepancy == 0.0);

    Gen g(54);
    for (const auto& B : catalog()) {
        for (int trial = 0; trial < 8; ++trial) {
            const State v = g.state(B->space(), -1, 1);
            const State f = trial % 2 ? State::constant(B->space(), g.uniform(-0.5, 0.5)) : State::zeros(B->space());
            const auto c = check_resolvent_scaling(*B, g.uniform(0.25, 4.0), g.uniform(0.05, 1.0), v, f, cfg);
            CHECK(c.pass);
            CHECK(c.discrepancy <= c.tolerance);
        }
    }
    OperatorSpec lin = testing::spec_of(OperatorKind::scalar_power);
    lin.alpha = 1.0;
    auto L = make_operator(lin);
    try {
        check_resolvent_scaling(*L, 2.0, 1.0, scalar(*L, 1.0), scalar(*L, 0.0), cfg);
        FAIL("expected unsupported-order");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::unsupported_order);
    }
}
