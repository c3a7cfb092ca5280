#include "accretive/resolvent.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "accretive/error.hpp"
#include "accretive/kernels.hpp"
#include "energy.hpp"
#include "mesh_energy.hpp"

namespace accretive {

namespace {

double signed_pow(double x, double a) { return x == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(x), a), x); }

SolverFailure failure(const char* what, double residual, int iters, std::vector<double> history) {
    std::ostringstream os;
    os << what << ": residual " << residual << " after " << iters << " iterations";
    return SolverFailure(ErrorKind::solver_failure, os.str(), std::move(history));
}

/// Root of u + λ sign(u)|u|^α = v, safeguarded Newton inside [min(0,v), max(0,v)].
double scalar_power_root(double v, double lambda, double alpha, double start, int& iters) {
    if (v == 0.0) return 0.0;
    double lo = std::min(0.0, v), hi = std::max(0.0, v);
    double u = (start > lo && start < hi) ? start : v / (1.0 + lambda);
    for (iters = 1; iters <= 200; ++iters) {
        const double g = u + lambda * signed_pow(u, alpha) - v;
        if (g == 0.0) break;
        if (g > 0.0)
            hi = u;
        else
            lo = u;
        const double dg = 1.0 + lambda * alpha * (u == 0.0 ? (alpha < 1.0 ? kInfinity : (alpha == 1.0 ? 1.0 : 0.0))
                                                           : std::pow(std::abs(u), alpha - 1.0));
        double next = std::isfinite(dg) ? u - g / dg : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (next == u || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(u)) {
            u = next;
            break;
        }
        u = next;
    }
    return u;
}

ResolventResult resolve_scalar_power(const OperatorInstance& A, double lambda, const State& v, const State* guess) {
    ResolventResult r;
    r.u = v;
    int iters = 0;
    const double alpha = A.spec().alpha;
    r.u[0] = scalar_power_root(v[0], lambda, alpha, guess ? (*guess)[0] : 0.0, iters);
    r.iterations = iters;
    r.residual = std::abs((r.u[0] - v[0]) / lambda + signed_pow(r.u[0], alpha));
    r.converged = true;
    return r;
}

ResolventResult resolve_sign(double lambda, const State& v) {
    ResolventResult r;
    r.u = v;
    kernels::soft_threshold(v.values, lambda, r.u.values);
    r.converged = true;
    return r;
}

void tridiagonal_solve(std::vector<double> sub, std::vector<double> diag, std::vector<double> sup,
                       std::vector<double>& rhs) {
    const std::size_t n = diag.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double w = sub[i] / diag[i - 1];
        diag[i] -= w * sup[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - sup[i] * rhs[i + 1]) / diag[i];
}

/// u + λ L φ(u) = v with L = -Δ_h (Dirichlet), φ(u) = |u|^{m-1}u. Newton runs in
/// u for m >= 1 and in w = φ(u) for m < 1 so the Jacobian stays bounded.
ResolventResult resolve_porous(const OperatorInstance& A, double lambda, const State& v, const State* guess,
                               const SolverConfig& cfg) {
    const std::size_t n = v.size();
    const double m = A.spec().m, h = A.h();
    const double c = lambda / (h * h);
    const bool in_u = m >= 1.0;
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double u0 = guess ? (*guess)[i] : v[i];
        x[i] = in_u ? u0 : signed_pow(u0, m);
    }
    auto u_of = [&](double xi) { return in_u ? xi : signed_pow(xi, 1.0 / m); };
    auto phi_of = [&](double xi) { return in_u ? signed_pow(xi, m) : xi; };

    std::vector<double> F(n), xt(n), Ft(n);
    auto eval = [&](const std::vector<double>& y, std::vector<double>& out) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double l = i > 0 ? phi_of(y[i - 1]) : 0.0;
            const double r = i + 1 < n ? phi_of(y[i + 1]) : 0.0;
            out[i] = u_of(y[i]) + c * (2.0 * phi_of(y[i]) - l - r) - v[i];
            s += h * out[i] * out[i];
        }
        return std::sqrt(s) / lambda;
    };

    ResolventResult res;
    std::vector<double> history;
    double r = eval(x, F);
    history.push_back(r);
    std::vector<double> sub(n), diag(n), sup(n), d(n);
    int it = 0;
    while (r > cfg.tol_resolvent && it < cfg.max_newton_iters) {
        ++it;
        for (std::size_t i = 0; i < n; ++i) {
            // dφ/dx and du/dx for the active variable
            auto dphi = [&](double xi) { return in_u ? m * std::pow(std::abs(xi), m - 1.0) : 1.0; };
            auto du = [&](double xi) { return in_u ? 1.0 : std::pow(std::abs(xi), 1.0 / m - 1.0) / m; };
            diag[i] = du(x[i]) + 2.0 * c * dphi(x[i]);
            sub[i] = i > 0 ? -c * dphi(x[i - 1]) : 0.0;
            sup[i] = i + 1 < n ? -c * dphi(x[i + 1]) : 0.0;
            d[i] = -F[i];
        }
        tridiagonal_solve(sub, diag, sup, d);
        double step = 1.0, rt = r;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            for (std::size_t i = 0; i < n; ++i) xt[i] = x[i] + step * d[i];
            rt = eval(xt, Ft);
            if (rt <= (1.0 - 1e-4 * step) * r || (ls > 40 && rt < r)) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        history.push_back(rt);
        if (!accepted) break;
        x.swap(xt);
        F.swap(Ft);
        r = rt;
    }
    res.u = v;
    for (std::size_t i = 0; i < n; ++i) res.u[i] = u_of(x[i]);
    res.residual = r;
    res.iterations = it;
    res.converged = r <= cfg.tol_resolvent;
    if (!res.converged) throw failure("porous-medium resolvent", r, it, history);
    return res;
}

ResolventResult resolve_energy(const OperatorInstance& A, double lambda, const State& v, const State* guess,
                               const SolverConfig& cfg) {
    const auto& s = A.spec();
    auto E = s.kind == OperatorKind::plaplacian_1d ? detail::plaplacian_1d_energy(s.n, s.p, A.h())
                                                   : detail::plaplacian_2d_energy(s.n, s.p, A.h());
    const auto& mu = A.space()->weights;
    E.prox.resize(E.nodes);
    E.target = v.values;
    for (std::size_t i = 0; i < E.nodes; ++i) E.prox[i] = mu[i] / lambda;
    std::vector<double> x = guess ? guess->values : v.values;
    std::vector<char> free(E.nodes, 1);
    auto mr = detail::minimize(E, free, mu, x, cfg);
    if (!mr.converged) throw failure("p-Laplacian resolvent", mr.residual, mr.iterations, mr.history);
    ResolventResult r;
    r.u = State(A.space(), std::move(x));
    r.residual = mr.residual;
    r.iterations = mr.iterations;
    r.converged = true;
    return r;
}

ResolventResult resolve_dtn(const OperatorInstance& A, double lambda, const State& v, const State* guess,
                            const SolverConfig& cfg) {
    const DiskMesh& mesh = *A.mesh();
    auto E = detail::disk_energy(mesh, A.spec().p, A.spec().m);
    const std::size_t n = mesh.node_count(), nb = mesh.boundary_count();
    const auto& sw = mesh.boundary_space()->weights;
    E.prox.assign(n, 0.0);
    E.target.assign(n, 0.0);
    std::vector<double> scale = mesh.node_area();
    const State& start = guess ? *guess : v;
    std::vector<double> x(n, 0.0);
    double mean = 0.0;
    for (std::size_t j = 0; j < nb; ++j) {
        const std::size_t b = mesh.boundary_node(j);
        E.prox[b] = sw[j] / lambda;
        E.target[b] = v[j];
        scale[b] = sw[j];
        mean += start[j] / static_cast<double>(nb);
    }
    x[mesh.center()] = mean;
    for (std::size_t k = 1; k <= mesh.spec().n_r; ++k)
        for (std::size_t j = 0; j < nb; ++j) x[mesh.ring_node(k, j)] = start[j];
    std::vector<char> free(n, 1);
    auto mr = detail::minimize(E, free, scale, x, cfg);
    if (!mr.converged) throw failure("DtN resolvent", mr.residual, mr.iterations, mr.history);
    ResolventResult r;
    r.u = State::zeros(A.space());
    for (std::size_t j = 0; j < nb; ++j) r.u[j] = x[mesh.boundary_node(j)];
    r.residual = mr.residual;
    r.iterations = mr.iterations;
    r.converged = true;
    return r;
}

void check_lambda(double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw Error(ErrorKind::invalid_argument, "resolvent step must be positive and finite");
}

}  // namespace

bool has_closed_form_resolvent(OperatorKind kind) {
    return kind == OperatorKind::scalar_power || kind == OperatorKind::zero_order_sign;
}

ResolventResult resolve(const OperatorInstance& A, double lambda, const State& v, const SolverConfig& cfg,
                        const State* guess) {
    check_lambda(lambda);
    require_same_space(A.space(), v.space, "resolvent data");
    if (guess) require_same_space(A.space(), guess->space, "resolvent initial guess");
    switch (A.kind()) {
        case OperatorKind::scalar_power: return resolve_scalar_power(A, lambda, v, guess);
        case OperatorKind::zero_order_sign: return resolve_sign(lambda, v);
        case OperatorKind::porous_medium_1d: return resolve_porous(A, lambda, v, guess, cfg);
        case OperatorKind::plaplacian_1d:
        case OperatorKind::plaplacian_2d: return resolve_energy(A, lambda, v, guess, cfg);
        case OperatorKind::dirichlet_to_neumann: return resolve_dtn(A, lambda, v, guess, cfg);
    }
    throw Error(ErrorKind::kind_unsupported, "resolvent");
}

ResolventResult resolve_shifted(const OperatorInstance& A, const State& f, double lambda, const State& v,
                                const SolverConfig& cfg, const State* guess) {
    check_lambda(lambda);
    return resolve(A, lambda, v + lambda * f, cfg, guess);
}

ResolventResult resolve_perturbed(const OperatorInstance& A, const Perturbation& F, double lambda, const State& v,
                                  const SolverConfig& cfg, const State* guess) {
    check_lambda(lambda);
    F.validate(v.size());
    const double omega = F.omega();
    if (lambda * omega >= 1.0) {
        std::ostringstream os;
        os << "lambda * omega = " << lambda * omega << " must stay below 1";
        throw Error(ErrorKind::step_too_large, os.str());
    }
    if (F.kind == PerturbationKind::zero || omega == 0.0) return resolve(A, lambda, v, cfg, guess);

    // successive iterates differ by at least the inner solver error (about λ·tol)
    const double tol = std::max(cfg.tol_fixedpoint, 4.0 * lambda * cfg.tol_resolvent);
    State u = guess ? *guess : v;
    std::vector<double> history;
    int inner = 0;
    for (int k = 0; k < cfg.max_fixedpoint_iters; ++k) {
        auto r = resolve(A, lambda, v - lambda * nemytskii(F, u), cfg, &u);
        inner += r.iterations;
        const double diff = lq_norm(r.u - u, 2.0);
        history.push_back(diff);
        u = std::move(r.u);
        if (diff <= tol) {
            ResolventResult out;
            out.u = std::move(u);
            out.residual = r.residual + omega * diff / lambda;
            out.iterations = inner;
            out.converged = true;
            return out;
        }
    }
    std::ostringstream os;
    os << "fixed point did not settle after " << cfg.max_fixedpoint_iters << " iterations (last step "
       << history.back() << ")";
    throw SolverFailure(ErrorKind::fixedpoint_stall, os.str(), history);
}

ScalingCheck check_resolvent_scaling(const OperatorInstance& A, double lambda, double mu, const State& v,
                                     const State& f, const SolverConfig& cfg) {
    const double alpha = A.alpha();
    if (alpha == 1.0) throw Error(ErrorKind::unsupported_order, "scaling identity needs alpha != 1");
    if (!(lambda > 0.0) || !(mu > 0.0)) throw Error(ErrorKind::invalid_argument, "scaling factors must be positive");
    const double c = std::pow(lambda, 1.0 / (alpha - 1.0));
    const double g = std::pow(lambda, alpha / (alpha - 1.0));
    ScalingCheck out;
    out.lhs = c * resolve_shifted(A, f, lambda * mu, v, cfg).u;
    out.rhs = resolve_shifted(A, g * f, mu, c * v, cfg).u;
    const double scale = std::max({lq_norm(out.lhs, 2.0), lq_norm(out.rhs, 2.0), 1e-300});
    out.discrepancy = lq_norm(out.lhs - out.rhs, 2.0) / scale;
    if (lq_norm(out.lhs - out.rhs, 2.0) == 0.0) out.discrepancy = 0.0;
    out.tolerance = has_closed_form_resolvent(A.kind()) ? 1e-6 : 10.0 * cfg.tol_resolvent;
    out.pass = out.discrepancy <= out.tolerance;
    return out;
}

}  // namespace accretive
