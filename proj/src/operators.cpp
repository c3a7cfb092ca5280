#include "accretive/operators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "accretive/error.hpp"
#include "accretive/kernels.hpp"
#include "mesh_energy.hpp"

namespace accretive {

std::string_view to_string(OperatorKind kind) {
    switch (kind) {
        case OperatorKind::scalar_power: return "ScalarPower";
        case OperatorKind::plaplacian_1d: return "PLaplacian1D";
        case OperatorKind::plaplacian_2d: return "PLaplacian2D";
        case OperatorKind::porous_medium_1d: return "PorousMedium1D";
        case OperatorKind::zero_order_sign: return "ZeroOrderSign";
        case OperatorKind::dirichlet_to_neumann: return "DirichletToNeumann";
    }
    return "unknown";
}

OperatorKind parse_operator_kind(std::string_view name) {
    for (auto k : {OperatorKind::scalar_power, OperatorKind::plaplacian_1d, OperatorKind::plaplacian_2d,
                   OperatorKind::porous_medium_1d, OperatorKind::zero_order_sign,
                   OperatorKind::dirichlet_to_neumann}) {
        if (to_string(k) == name) return k;
    }
    if (name == "DtN") return OperatorKind::dirichlet_to_neumann;
    throw Error(ErrorKind::config_parse, "unknown operator kind '" + std::string(name) + "'");
}

DiskMesh::DiskMesh(const DiskMeshSpec& spec) : spec_(spec) {
    if (spec.n_r < 2 || spec.n_theta < 4)
        throw Error(ErrorKind::invalid_argument, "disk mesh needs n_r >= 2 and n_theta >= 4");
    if (!(spec.radius > 0.0) || !std::isfinite(spec.radius))
        throw Error(ErrorKind::invalid_argument, "disk radius must be positive");
    const std::size_t nt = spec.n_theta;
    const double dr = spec.radius / static_cast<double>(spec.n_r);
    const double dth = 2.0 * std::numbers::pi / static_cast<double>(nt);

    x_.push_back(0.0);
    y_.push_back(0.0);
    for (std::size_t k = 1; k <= spec.n_r; ++k) {
        const double r = k == spec.n_r ? spec.radius : static_cast<double>(k) * dr;
        for (std::size_t j = 0; j < nt; ++j) {
            const double th = static_cast<double>(j) * dth;
            x_.push_back(r * std::cos(th));
            y_.push_back(r * std::sin(th));
        }
    }

    auto add = [&](std::size_t a, std::size_t b, std::size_t c) {
        Triangle t{};
        t.v = {a, b, c};
        const double x0 = x_[a], y0 = y_[a], x1 = x_[b], y1 = y_[b], x2 = x_[c], y2 = y_[c];
        const double area2 = (x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0);
        t.gx = {(y1 - y2) / area2, (y2 - y0) / area2, (y0 - y1) / area2};
        t.gy = {(x2 - x1) / area2, (x0 - x2) / area2, (x1 - x0) / area2};
        t.area = 0.5 * std::abs(area2);
        triangles_.push_back(t);
    };
    for (std::size_t j = 0; j < nt; ++j) add(center(), ring_node(1, j), ring_node(1, j + 1));
    for (std::size_t k = 1; k < spec.n_r; ++k) {
        for (std::size_t j = 0; j < nt; ++j) {
            const std::size_t a = ring_node(k, j), b = ring_node(k + 1, j), c = ring_node(k + 1, j + 1),
                              d = ring_node(k, j + 1);
            add(a, b, c);
            add(a, c, d);
        }
    }

    node_area_.assign(x_.size(), 0.0);
    for (const auto& t : triangles_)
        for (std::size_t v : t.v) node_area_[v] += t.area / 3.0;
    for (std::size_t i = 0; i < x_.size(); ++i)
        if (!is_boundary(i)) interior_.push_back(i);

    boundary_space_ = uniform_space(nt, spec.radius * dth, "disk-boundary");
}

double DiskMesh::r(std::size_t node) const { return std::hypot(x_[node], y_[node]); }

namespace {

std::string fmt(double x) {
    std::ostringstream os;
    os << x;
    return os.str();
}

void require(bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorKind::invalid_argument, what);
}

}  // namespace

OperatorInstance::OperatorInstance(const OperatorSpec& spec) : spec_(spec) {
    const auto grid_spacing = [&] {
        require(spec.n >= 1, "grid operators need at least one interior node");
        h_ = spec.h_x > 0.0 ? spec.h_x : 1.0 / static_cast<double>(spec.n + 1);
        require(std::isfinite(h_), "grid spacing must be finite");
    };
    switch (spec.kind) {
        case OperatorKind::scalar_power:
            require(spec.n == 1, "ScalarPower acts on a single-node space");
            require(spec.alpha > 0.0 && std::isfinite(spec.alpha), "ScalarPower needs alpha > 0");
            h_ = 1.0;
            space_ = uniform_space(1, 1.0, "scalar");
            break;
        case OperatorKind::plaplacian_1d:
            require(spec.p > 1.0 && std::isfinite(spec.p), "p-Laplacian needs p > 1");
            grid_spacing();
            space_ = uniform_space(spec.n, h_, "grid-1d");
            break;
        case OperatorKind::plaplacian_2d:
            require(spec.p > 1.0 && std::isfinite(spec.p), "p-Laplacian needs p > 1");
            grid_spacing();
            space_ = uniform_space(spec.n * spec.n, h_ * h_, "grid-2d");
            break;
        case OperatorKind::porous_medium_1d:
            require(spec.m > 0.0 && std::isfinite(spec.m), "porous medium needs m > 0");
            grid_spacing();
            space_ = uniform_space(spec.n, h_, "grid-1d");
            break;
        case OperatorKind::zero_order_sign:
            grid_spacing();
            space_ = uniform_space(spec.n, h_, "grid-1d");
            break;
        case OperatorKind::dirichlet_to_neumann: {
            require(spec.p > 1.0 && std::isfinite(spec.p), "DtN needs p > 1");
            require(spec.m > 0.0 && std::isfinite(spec.m), "DtN needs a positive mass coefficient m");
            auto mesh = std::make_shared<DiskMesh>(spec.mesh);
            space_ = mesh->boundary_space();
            mesh_ = std::move(mesh);
            break;
        }
    }
}

double OperatorInstance::alpha() const {
    switch (spec_.kind) {
        case OperatorKind::scalar_power: return spec_.alpha;
        case OperatorKind::plaplacian_1d:
        case OperatorKind::plaplacian_2d:
        case OperatorKind::dirichlet_to_neumann: return spec_.p - 1.0;
        case OperatorKind::porous_medium_1d: return spec_.m;
        case OperatorKind::zero_order_sign: return 0.0;
    }
    return 0.0;
}

std::string OperatorInstance::describe() const {
    std::ostringstream os;
    os << to_string(spec_.kind);
    switch (spec_.kind) {
        case OperatorKind::scalar_power: os << "(alpha=" << fmt(spec_.alpha) << ")"; break;
        case OperatorKind::plaplacian_1d:
        case OperatorKind::plaplacian_2d: os << "(p=" << fmt(spec_.p) << ",n=" << spec_.n << ")"; break;
        case OperatorKind::porous_medium_1d: os << "(m=" << fmt(spec_.m) << ",n=" << spec_.n << ")"; break;
        case OperatorKind::zero_order_sign: os << "(n=" << spec_.n << ")"; break;
        case OperatorKind::dirichlet_to_neumann:
            os << "(p=" << fmt(spec_.p) << ",m=" << fmt(spec_.m) << ",mesh=" << spec_.mesh.n_r << "x"
               << spec_.mesh.n_theta << ")";
            break;
    }
    return os.str();
}

namespace {

template <bool Serial>
State apply_impl(const OperatorInstance& A, const State& u) {
    require_same_space(A.space(), u.space, "operator apply");
    State out = State::zeros(A.space());
    const auto& s = A.spec();
    switch (s.kind) {
        case OperatorKind::scalar_power:
            if constexpr (Serial)
                kernels::serial::signed_power(u.values, s.alpha, out.values);
            else
                kernels::signed_power(u.values, s.alpha, out.values);
            break;
        case OperatorKind::plaplacian_1d:
            if constexpr (Serial)
                kernels::serial::plaplacian_1d(u.values, s.p, A.h(), out.values);
            else
                kernels::plaplacian_1d(u.values, s.p, A.h(), out.values);
            break;
        case OperatorKind::plaplacian_2d:
            if constexpr (Serial)
                kernels::serial::plaplacian_2d(u.values, s.n, s.n, s.p, A.h(), out.values);
            else
                kernels::plaplacian_2d(u.values, s.n, s.n, s.p, A.h(), out.values);
            break;
        case OperatorKind::porous_medium_1d:
            if constexpr (Serial)
                kernels::serial::porous_medium_1d(u.values, s.m, A.h(), out.values);
            else
                kernels::porous_medium_1d(u.values, s.m, A.h(), out.values);
            break;
        case OperatorKind::zero_order_sign:
            for (std::size_t i = 0; i < u.size(); ++i) {
                if (u[i] == 0.0) {
                    throw Error(ErrorKind::multivalued_at_point,
                                "sign operator is set-valued at node " + std::to_string(i));
                }
                out[i] = u[i] > 0.0 ? 1.0 : -1.0;
            }
            break;
        case OperatorKind::dirichlet_to_neumann:
            throw Error(ErrorKind::kind_unsupported, "DtN evaluation needs a Dirichlet solve; use dtn_apply");
    }
    return out;
}

}  // namespace

State OperatorInstance::apply(const State& u) const { return apply_impl<false>(*this, u); }
State OperatorInstance::apply_serial(const State& u) const { return apply_impl<true>(*this, u); }

OperatorPtr make_operator(const OperatorSpec& spec) { return std::make_shared<const OperatorInstance>(spec); }

std::string_view to_string(PerturbationKind kind) {
    switch (kind) {
        case PerturbationKind::zero: return "Zero";
        case PerturbationKind::linear: return "Linear";
        case PerturbationKind::scaled_arctan: return "ScaledArctan";
        case PerturbationKind::nodewise_lipschitz: return "NodewiseLipschitz";
    }
    return "unknown";
}

PerturbationKind parse_perturbation_kind(std::string_view name) {
    for (auto k : {PerturbationKind::zero, PerturbationKind::linear, PerturbationKind::scaled_arctan,
                   PerturbationKind::nodewise_lipschitz}) {
        if (to_string(k) == name) return k;
    }
    throw Error(ErrorKind::config_parse, "unknown perturbation kind '" + std::string(name) + "'");
}

Perturbation Perturbation::linear(double c) {
    Perturbation F;
    F.kind = PerturbationKind::linear;
    F.c = c;
    return F;
}

Perturbation Perturbation::scaled_arctan(double omega) {
    Perturbation F;
    F.kind = PerturbationKind::scaled_arctan;
    F.scale = omega;
    return F;
}

Perturbation Perturbation::nodewise(std::vector<double> knots_x, std::vector<double> knots_y,
                                    std::vector<double> node_scale) {
    Perturbation F;
    F.kind = PerturbationKind::nodewise_lipschitz;
    F.knots_x = std::move(knots_x);
    F.knots_y = std::move(knots_y);
    F.node_scale = std::move(node_scale);
    return F;
}

namespace {

double table_value(const Perturbation& F, double u) {
    const auto& X = F.knots_x;
    const auto& Y = F.knots_y;
    std::size_t i;
    if (u <= X.front())
        i = 0;
    else if (u >= X.back())
        i = X.size() - 2;
    else
        i = static_cast<std::size_t>(std::upper_bound(X.begin(), X.end(), u) - X.begin()) - 1;
    const double slope = (Y[i + 1] - Y[i]) / (X[i + 1] - X[i]);
    return Y[i] + slope * (u - X[i]);
}

}  // namespace

double Perturbation::omega() const {
    switch (kind) {
        case PerturbationKind::zero: return 0.0;
        case PerturbationKind::linear: return std::abs(c);
        case PerturbationKind::scaled_arctan: return std::abs(scale);
        case PerturbationKind::nodewise_lipschitz: {
            double slope = 0.0;
            for (std::size_t i = 0; i + 1 < knots_x.size(); ++i)
                slope = std::max(slope, std::abs((knots_y[i + 1] - knots_y[i]) / (knots_x[i + 1] - knots_x[i])));
            double sc = node_scale.empty() ? 1.0 : 0.0;
            for (double s : node_scale) sc = std::max(sc, std::abs(s));
            return slope * sc;
        }
    }
    return 0.0;
}

void Perturbation::validate(std::size_t n) const {
    switch (kind) {
        case PerturbationKind::zero: return;
        case PerturbationKind::linear: require(std::isfinite(c), "linear perturbation slope must be finite"); return;
        case PerturbationKind::scaled_arctan:
            require(std::isfinite(scale), "arctan perturbation scale must be finite");
            return;
        case PerturbationKind::nodewise_lipschitz:
            require(knots_x.size() >= 2 && knots_x.size() == knots_y.size(), "Lipschitz table needs >= 2 knots");
            for (std::size_t i = 0; i + 1 < knots_x.size(); ++i)
                require(knots_x[i + 1] > knots_x[i], "Lipschitz table knots must increase");
            require(node_scale.empty() || node_scale.size() == n, "node scale length differs from the space");
            require(std::abs(table_value(*this, 0.0)) <= 1e-14, "perturbation must satisfy F(0) = 0");
            return;
    }
}

State nemytskii(const Perturbation& F, const State& u) {
    State out = State::zeros(u.space);
    switch (F.kind) {
        case PerturbationKind::zero: break;
        case PerturbationKind::linear:
            for (std::size_t i = 0; i < u.size(); ++i) out[i] = F.c * u[i];
            break;
        case PerturbationKind::scaled_arctan:
            for (std::size_t i = 0; i < u.size(); ++i) out[i] = F.scale * std::atan(u[i]);
            break;
        case PerturbationKind::nodewise_lipschitz:
            F.validate(u.size());
            for (std::size_t i = 0; i < u.size(); ++i)
                out[i] = (F.node_scale.empty() ? 1.0 : F.node_scale[i]) * table_value(F, u[i]);
            break;
    }
    return out;
}

DirichletSolution dirichlet_solve(const DiskMesh& mesh, double p, double m, const State& phi,
                                  const SolverConfig& cfg) {
    require_same_space(mesh.boundary_space(), phi.space, "Dirichlet data");
    const auto E = detail::disk_energy(mesh, p, m);
    const std::size_t n = mesh.node_count();
    std::vector<char> free(n, 0);
    for (std::size_t i : mesh.interior_nodes()) free[i] = 1;

    std::vector<double> x(n, 0.0);
    double mean = 0.0;
    for (std::size_t j = 0; j < mesh.boundary_count(); ++j) mean += phi[j];
    mean /= static_cast<double>(mesh.boundary_count());
    x[mesh.center()] = mean;
    for (std::size_t k = 1; k <= mesh.spec().n_r; ++k)
        for (std::size_t j = 0; j < mesh.spec().n_theta; ++j) x[mesh.ring_node(k, j)] = phi[j];

    auto res = detail::minimize(E, free, mesh.node_area(), x, cfg);
    if (!res.converged) {
        std::ostringstream os;
        os << "Dirichlet solve stopped at residual " << res.residual << " after " << res.iterations
           << " Newton iterations";
        throw SolverFailure(ErrorKind::solver_failure, os.str(), res.history);
    }
    DirichletSolution sol;
    sol.values = std::move(x);
    sol.residual = res.residual;
    sol.iterations = res.iterations;
    sol.residual_history = std::move(res.history);
    return sol;
}

State dtn_apply(const DiskMesh& mesh, double p, double m, const State& phi, const SolverConfig& cfg) {
    const auto sol = dirichlet_solve(mesh, p, m, phi, cfg);
    const auto E = detail::disk_energy(mesh, p, m);
    std::vector<double> g;
    E.gradient(sol.values, g);
    State h = State::zeros(mesh.boundary_space());
    const auto& w = mesh.boundary_space()->weights;
    for (std::size_t j = 0; j < mesh.boundary_count(); ++j) h[j] = g[mesh.boundary_node(j)] / w[j];
    return h;
}

State dtn_apply(const OperatorInstance& op, const State& phi, const SolverConfig& cfg) {
    if (op.kind() != OperatorKind::dirichlet_to_neumann || op.mesh() == nullptr)
        throw Error(ErrorKind::kind_unsupported, "dtn_apply needs a DirichletToNeumann operator");
    return dtn_apply(*op.mesh(), op.spec().p, op.spec().m, phi, cfg);
}

}  // namespace accretive
