#include "doctest.h"

#include <cmath>
#include <numbers>

#include "accretive/error.hpp"
#include "accretive/operators.hpp"
#include "support.hpp"

using namespace accretive;
using testing::Gen;

TEST_CASE("operator construction enforces parameters") {
    OperatorSpec s;
    s.kind = OperatorKind::scalar_power;
    s.n = 2;
    CHECK_THROWS_AS(OperatorInstance{s}, Error);
    s.n = 1;
    s.alpha = 0.0;
    CHECK_THROWS_AS(OperatorInstance{s}, Error);
    s.kind = OperatorKind::plaplacian_1d;
    s.p = 1.0;
    CHECK_THROWS_AS(OperatorInstance{s}, Error);
    s.kind = OperatorKind::porous_medium_1d;
    s.m = 0.0;
    CHECK_THROWS_AS(OperatorInstance{s}, Error);
    s = testing::spec_of(OperatorKind::dirichlet_to_neumann);
    s.m = 0.0;
    CHECK_THROWS_AS(OperatorInstance{s}, Error);
    CHECK(parse_operator_kind("PLaplacian2D") == OperatorKind::plaplacian_2d);
    CHECK(parse_operator_kind("DtN") == OperatorKind::dirichlet_to_neumann);
    CHECK_THROWS_AS(parse_operator_kind("Laplacian3D"), Error);
}

TEST_CASE("declared homogeneity orders") {
    auto order = [](OperatorSpec s) { return OperatorInstance(s).alpha(); };
    OperatorSpec s = testing::spec_of(OperatorKind::scalar_power);
    s.alpha = 0.7;
    CHECK(order(s) == 0.7);
    CHECK(order(testing::spec_of(OperatorKind::plaplacian_1d)) == 2.0);
    CHECK(order(testing::spec_of(OperatorKind::plaplacian_2d)) == 2.0);
    CHECK(order(testing::spec_of(OperatorKind::porous_medium_1d)) == 2.0);
    CHECK(order(testing::spec_of(OperatorKind::zero_order_sign)) == 0.0);
    CHECK(order(testing::spec_of(OperatorKind::dirichlet_to_neumann)) == 2.0);
}

TEST_CASE("apply examples") {
    for (auto kind : testing::grid_kinds()) {
        if (kind == OperatorKind::zero_order_sign) continue;
        auto A = make_operator(testing::spec_of(kind));
        const State z = State::zeros(A->space());
        CHECK(lq_norm(A->apply(z), kInfinity) == 0.0);
    }
    auto sp = make_operator(testing::spec_of(OperatorKind::scalar_power));
    CHECK(sp->apply(State(sp->space(), {3.0}))[0] == 9.0);

    OperatorSpec pm;
    pm.kind = OperatorKind::porous_medium_1d;
    pm.m = 2.0;
    pm.n = 3;
    pm.h_x = 1.0;
    auto P = make_operator(pm);
    CHECK(P->apply(State(P->space(), {0.0, 1.0, 0.0}))[1] == 2.0);

    auto sg = make_operator(testing::spec_of(OperatorKind::zero_order_sign, 3));
    try {
        sg->apply(State(sg->space(), {1.0, 0.0, -1.0}));
        FAIL("expected a set-valued error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::multivalued_at_point);
    }
    auto dtn = make_operator(testing::spec_of(OperatorKind::dirichlet_to_neumann));
    try {
        dtn->apply(State::zeros(dtn->space()));
        FAIL("expected kind-unsupported");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::kind_unsupported);
    }
}

TEST_CASE("discrete homogeneity A(λu) = λ^α A(u)") {
    Gen g(31);
    for (auto kind : testing::grid_kinds()) {
        auto A = make_operator(testing::spec_of(kind, 24));
        for (int trial = 0; trial < 20; ++trial) {
            const State u = g.state(A->space(), -2, 2);
            const State Au = A->apply(u);
            for (double lambda : {0.0, 0.5, 1.0, 2.0, 10.0}) {
                if (kind == OperatorKind::zero_order_sign && lambda == 0.0) continue;
                const State lhs = A->apply(lambda * u);
                const State rhs = std::pow(lambda, A->alpha()) * Au;
                CHECK(testing::max_abs_diff(lhs, rhs) <= 1e-10 * (1.0 + std::pow(lambda, A->alpha()) * lq_norm(Au, kInfinity)));
            }
        }
    }
}

TEST_CASE("sampled complete accretivity: ∫T(u-v)(Au-Av) >= 0") {
    Gen g(32);
    for (auto kind : testing::grid_kinds()) {
        auto A = make_operator(testing::spec_of(kind, 20));
        const auto& w = A->space()->weights;
        for (int trial = 0; trial < 40; ++trial) {
            const State u = g.state(A->space(), -2, 2), v = g.state(A->space(), -2, 2);
            const State d = A->apply(u) - A->apply(v);
            const double c = g.uniform(0.2, 5.0), clip = g.uniform(0.1, 1.0);
            double s = 0.0, scale = 0.0;
            for (std::size_t i = 0; i < u.size(); ++i) {
                const double T = std::clamp(std::tanh(c * (u[i] - v[i])), -clip, clip);
                s += w[i] * T * d[i];
                scale += w[i] * std::abs(T * d[i]);
            }
            CHECK(s >= -1e-12 * (1.0 + scale));
        }
    }
}

TEST_CASE("serial and parallel apply agree") {
    Gen g(33);
    for (auto kind : testing::grid_kinds()) {
        auto A = make_operator(testing::spec_of(kind, 3000));
        const State u = g.state(A->space(), -1, 1);
        CHECK(A->apply(u).values == A->apply_serial(u).values);
    }
}

TEST_CASE("nemytskii examples and Lipschitz bound") {
    const auto s = uniform_space(2, 1.0);
    for (const auto& F : {Perturbation::zero(), Perturbation::linear(0.5), Perturbation::scaled_arctan(1.0)})
        CHECK(lq_norm(nemytskii(F, State::zeros(s)), kInfinity) == 0.0);
    const State y = nemytskii(Perturbation::linear(0.5), State(s, {2.0, -4.0}));
    CHECK(y[0] == 1.0);
    CHECK(y[1] == -2.0);
    CHECK(nemytskii(Perturbation::scaled_arctan(1.0), State(uniform_space(1, 1.0), {1.0}))[0] ==
          doctest::Approx(0.7853981634).epsilon(1e-10));
    CHECK_THROWS_AS(Perturbation::nodewise({0.0, 1.0}, {0.5, 1.0}, {}).validate(2), Error);

    Gen g(34);
    const auto table = Perturbation::nodewise({-1.0, 0.0, 0.5, 2.0}, {0.3, 0.0, -0.4, 0.2}, {});
    for (const auto& F : {Perturbation::linear(-0.7), Perturbation::scaled_arctan(1.3), table}) {
        for (int trial = 0; trial < 100; ++trial) {
            const auto sp = g.space(8);
            const State u = g.state(sp, -3, 3), v = g.state(sp, -3, 3);
            for (double q : {1.0, 2.0, kInfinity})
                CHECK(lq_norm(nemytskii(F, u) - nemytskii(F, v), q) <= F.omega() * lq_norm(u - v, q) * (1 + 1e-12));
        }
    }
}

TEST_CASE("disk mesh geometry") {
    DiskMesh mesh({8, 16, 2.0});
    double total = 0.0;
    for (double w : mesh.boundary_space()->weights) total += w;
    CHECK(total == doctest::Approx(2.0 * std::numbers::pi * 2.0).epsilon(1e-12));
    double area = 0.0;
    for (const auto& t : mesh.triangles()) {
        CHECK(t.area > 0.0);
        area += t.area;
    }
    CHECK(mesh.node_count() == 1 + 8 * 16);
    CHECK(mesh.interior_nodes().size() == 1 + 7 * 16);
    // inscribed polygon area
    CHECK(area == doctest::Approx(0.5 * 16 * 4.0 * std::sin(2 * std::numbers::pi / 16)).epsilon(1e-12));
    CHECK_THROWS_AS(DiskMesh({1, 16, 1.0}), Error);
}
