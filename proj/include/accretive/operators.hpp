#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "accretive/core.hpp"

namespace accretive {

enum class OperatorKind {
    scalar_power,
    plaplacian_1d,
    plaplacian_2d,
    porous_medium_1d,
    zero_order_sign,
    dirichlet_to_neumann,
};

std::string_view to_string(OperatorKind kind);
OperatorKind parse_operator_kind(std::string_view name);

struct DiskMeshSpec {
    std::size_t n_r = 32;
    std::size_t n_theta = 64;
    double radius = 1.0;
};

/// Polar tensor grid on the disk of radius R, triangulated: the innermost ring
/// is a fan around a single center node, every annular cell is split into two
/// triangles. Gradients are constant per triangle; the mass term is lumped to
/// the nodes; boundary nodes carry exact arc-length weights R·Δθ.
class DiskMesh {
public:
    explicit DiskMesh(const DiskMeshSpec& spec);

    const DiskMeshSpec& spec() const { return spec_; }
    std::size_t node_count() const { return x_.size(); }
    std::size_t boundary_count() const { return spec_.n_theta; }

    double x(std::size_t node) const { return x_[node]; }
    double y(std::size_t node) const { return y_[node]; }
    double r(std::size_t node) const;

    std::size_t center() const { return 0; }
    std::size_t ring_node(std::size_t ring, std::size_t j) const {
        return 1 + (ring - 1) * spec_.n_theta + (j % spec_.n_theta);
    }
    std::size_t boundary_node(std::size_t j) const { return ring_node(spec_.n_r, j); }
    bool is_boundary(std::size_t node) const { return node >= ring_node(spec_.n_r, 0); }

    struct Triangle {
        std::array<std::size_t, 3> v;
        std::array<double, 3> gx;  ///< ∂λ_k/∂x of the barycentric coordinates
        std::array<double, 3> gy;
        double area;
    };
    const std::vector<Triangle>& triangles() const { return triangles_; }
    /// Lumped (area / 3) nodal weights.
    const std::vector<double>& node_area() const { return node_area_; }
    const std::vector<std::size_t>& interior_nodes() const { return interior_; }

    /// Boundary weighted space (arc-length weights); the DtN state space.
    const SpacePtr& boundary_space() const { return boundary_space_; }

private:
    DiskMeshSpec spec_;
    std::vector<double> x_, y_;
    std::vector<Triangle> triangles_;
    std::vector<double> node_area_;
    std::vector<std::size_t> interior_;
    SpacePtr boundary_space_;
};

struct OperatorSpec {
    OperatorKind kind = OperatorKind::scalar_power;
    double alpha = 2.0;  ///< ScalarPower only
    double p = 2.0;      ///< p-Laplacian kinds and DtN
    double m = 1.0;      ///< porous-medium exponent, DtN mass coefficient
    std::size_t n = 1;   ///< node count (1D kinds, ZeroOrderSign); side length for 2D
    double h_x = 0.0;    ///< grid spacing; 0 selects 1 / (n + 1)
    DiskMeshSpec mesh;   ///< DtN only
};

/// A homogeneous operator bound to its weighted space.
class OperatorInstance {
public:
    explicit OperatorInstance(const OperatorSpec& spec);

    OperatorKind kind() const { return spec_.kind; }
    const OperatorSpec& spec() const { return spec_; }
    const SpacePtr& space() const { return space_; }
    /// Homogeneity order: A(λu) = λ^α A(u).
    double alpha() const;
    double h() const { return h_; }
    const DiskMesh* mesh() const { return mesh_.get(); }
    std::string describe() const;

    /// Single-valued evaluation. Throws multivalued-at-point for
    /// ZeroOrderSign at zero nodes and kind-unsupported for DtN (see dtn_apply).
    State apply(const State& u) const;

    /// Serial reference evaluation (same contract as apply).
    State apply_serial(const State& u) const;

private:
    OperatorSpec spec_;
    double h_ = 0.0;
    SpacePtr space_;
    std::shared_ptr<const DiskMesh> mesh_;
};

using OperatorPtr = std::shared_ptr<const OperatorInstance>;

OperatorPtr make_operator(const OperatorSpec& spec);

enum class PerturbationKind { zero, linear, scaled_arctan, nodewise_lipschitz };

std::string_view to_string(PerturbationKind kind);
PerturbationKind parse_perturbation_kind(std::string_view name);

/// Lipschitz Nemytskii map F with F(0) = 0.
/// NodewiseLipschitz evaluates F(u)_i = c_i g(u_i), where g is the piecewise
/// linear interpolant of (knots_x, knots_y), extended linearly past the ends.
struct Perturbation {
    PerturbationKind kind = PerturbationKind::zero;
    double c = 0.0;      ///< Linear slope
    double scale = 0.0;  ///< ScaledArctan factor
    std::vector<double> knots_x, knots_y;
    std::vector<double> node_scale;

    static Perturbation zero() { return {}; }
    static Perturbation linear(double c);
    static Perturbation scaled_arctan(double omega);
    static Perturbation nodewise(std::vector<double> knots_x, std::vector<double> knots_y,
                                 std::vector<double> node_scale);

    /// Lipschitz constant ω.
    double omega() const;
    void validate(std::size_t n) const;
};

State nemytskii(const Perturbation& F, const State& u);

struct DirichletSolution {
    std::vector<double> values;  ///< all mesh nodes
    double residual = 0.0;
    int iterations = 0;
    std::vector<double> residual_history;
};

/// Minimizes (1/p) ∫ |∇u|^p + m |u|^p over the mesh with u = φ on the boundary.
DirichletSolution dirichlet_solve(const DiskMesh& mesh, double p, double m, const State& phi,
                                  const SolverConfig& cfg);

/// Dirichlet-to-Neumann map: the bulk form at the Dirichlet solution tested
/// against each boundary hat function, divided by the boundary weight.
State dtn_apply(const DiskMesh& mesh, double p, double m, const State& phi, const SolverConfig& cfg);
State dtn_apply(const OperatorInstance& op, const State& phi, const SolverConfig& cfg);

}  // namespace accretive
