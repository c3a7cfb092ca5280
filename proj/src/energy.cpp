#include "energy.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <limits>

namespace accretive::detail {

namespace {

constexpr double kRegularization = 1e-12;

struct CellGrad {
    double gx = 0.0, gy = 0.0;
};

CellGrad eval_cell(const Cell& c, const std::vector<double>& x) {
    CellGrad g;
    for (int k = 0; k < 3; ++k) {
        if (c.v[k] == kGhost) continue;
        g.gx += c.gx[k] * x[c.v[k]];
        g.gy += c.gy[k] * x[c.v[k]];
    }
    return g;
}

double pow_abs(double s2, double e) { return s2 == 0.0 ? 0.0 : std::pow(s2, e); }

}  // namespace

double PowerEnergy::value(const std::vector<double>& x) const {
    double e = 0.0;
    for (const auto& c : cells) {
        const CellGrad g = eval_cell(c, x);
        e += c.weight * pow_abs(g.gx * g.gx + g.gy * g.gy, 0.5 * p) / p;
    }
    if (!mass.empty())
        for (std::size_t i = 0; i < nodes; ++i) e += mass[i] * std::pow(std::abs(x[i]), p) / p;
    if (!prox.empty())
        for (std::size_t i = 0; i < nodes; ++i) e += 0.5 * prox[i] * (x[i] - target[i]) * (x[i] - target[i]);
    return e;
}

void PowerEnergy::gradient(const std::vector<double>& x, std::vector<double>& grad) const {
    grad.assign(nodes, 0.0);
    for (const auto& c : cells) {
        const CellGrad g = eval_cell(c, x);
        const double s = c.weight * pow_abs(g.gx * g.gx + g.gy * g.gy, 0.5 * (p - 2.0));
        for (int k = 0; k < 3; ++k) {
            if (c.v[k] == kGhost) continue;
            grad[c.v[k]] += s * (g.gx * c.gx[k] + g.gy * c.gy[k]);
        }
    }
    if (!mass.empty())
        for (std::size_t i = 0; i < nodes; ++i) {
            if (x[i] != 0.0) grad[i] += mass[i] * std::copysign(std::pow(std::abs(x[i]), p - 1.0), x[i]);
        }
    if (!prox.empty())
        for (std::size_t i = 0; i < nodes; ++i) grad[i] += prox[i] * (x[i] - target[i]);
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

void assemble_hessian(const PowerEnergy& E, const std::vector<double>& x, const std::vector<std::ptrdiff_t>& index,
                      std::size_t nfree, SpMat& H) {
    std::vector<Triplet> t;
    t.reserve(E.cells.size() * 9 + E.nodes);
    const double p = E.p;
    const double eps = p < 2.0 ? kRegularization : 0.0;
    // exact Newton overshoots when p < 2 (|x|^p at p = 1.5 maps x to -x);
    // the curvature along g is raised to at least 0.75 a
    const double theta = p < 2.0 ? std::min(1.0, 0.25 / (2.0 - p)) : 1.0;
    for (const auto& c : E.cells) {
        const CellGrad g = eval_cell(c, x);
        const double s2 = g.gx * g.gx + g.gy * g.gy + eps;
        // zero entries are still inserted so the sparsity pattern stays fixed
        const double a = s2 == 0.0 ? 0.0 : c.weight * std::pow(s2, 0.5 * (p - 2.0));
        const double b = s2 == 0.0 ? 0.0 : theta * a * (p - 2.0) / s2;
        // H_g = a I + b g g^T
        for (int k = 0; k < 3; ++k) {
            if (c.v[k] == kGhost || index[c.v[k]] < 0) continue;
            for (int l = 0; l < 3; ++l) {
                if (c.v[l] == kGhost || index[c.v[l]] < 0) continue;
                const double gk = g.gx * c.gx[k] + g.gy * c.gy[k];
                const double gl = g.gx * c.gx[l] + g.gy * c.gy[l];
                const double val = a * (c.gx[k] * c.gx[l] + c.gy[k] * c.gy[l]) + b * gk * gl;
                t.emplace_back(index[c.v[k]], index[c.v[l]], val);
            }
        }
    }
    for (std::size_t i = 0; i < E.nodes; ++i) {
        if (index[i] < 0) continue;
        double d = 0.0;
        if (!E.mass.empty() && E.mass[i] != 0.0) {
            const double s2 = x[i] * x[i] + eps;
            if (s2 > 0.0) d += E.mass[i] * (1.0 + theta * (p - 2.0)) * std::pow(s2, 0.5 * (p - 2.0));
        }
        if (!E.prox.empty()) d += E.prox[i];
        t.emplace_back(index[i], index[i], d);
    }
    H.resize(static_cast<Eigen::Index>(nfree), static_cast<Eigen::Index>(nfree));
    H.setFromTriplets(t.begin(), t.end());
}

double residual_norm(const std::vector<double>& g, const std::vector<char>& free, const std::vector<double>& scale) {
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (free[i]) s += g[i] * g[i] / scale[i];
    return std::sqrt(s);
}

}  // namespace

MinimizeResult minimize(const PowerEnergy& E, const std::vector<char>& free, const std::vector<double>& scale,
                        std::vector<double>& x, const SolverConfig& cfg) {
    MinimizeResult res;
    std::vector<std::ptrdiff_t> index(E.nodes, -1);
    std::size_t nfree = 0;
    for (std::size_t i = 0; i < E.nodes; ++i)
        if (free[i]) index[i] = static_cast<std::ptrdiff_t>(nfree++);

    std::vector<double> g, gt, xt(x);
    E.gradient(x, g);
    double r = residual_norm(g, free, scale);
    res.history.push_back(r);
    if (nfree == 0 || r <= cfg.tol_resolvent) {
        res.residual = r;
        res.converged = true;
        return res;
    }

    SpMat H;
    Eigen::SimplicialLDLT<SpMat> ldlt;
    bool pattern_ready = false;
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(nfree)), dir;
    double e0 = E.value(x);

    for (int it = 0; it < cfg.max_newton_iters; ++it) {
        res.iterations = it + 1;
        for (std::size_t i = 0; i < E.nodes; ++i)
            if (index[i] >= 0) rhs[index[i]] = -g[i];

        assemble_hessian(E, x, index, nfree, H);
        if (!pattern_ready) {
            ldlt.analyzePattern(H);
            pattern_ready = true;
        }
        bool have_dir = false;
        double shift = 0.0;
        double diag_scale = 0.0;
        for (Eigen::Index k = 0; k < H.outerSize(); ++k)
            for (SpMat::InnerIterator itr(H, k); itr; ++itr)
                if (itr.row() == itr.col()) diag_scale = std::max(diag_scale, std::abs(itr.value()));
        for (int attempt = 0; attempt < 8 && !have_dir; ++attempt) {
            SpMat Hs = H;
            if (shift > 0.0)
                for (std::size_t i = 0; i < E.nodes; ++i)
                    if (index[i] >= 0) Hs.coeffRef(index[i], index[i]) += shift * scale[i];
            ldlt.factorize(Hs);
            if (ldlt.info() == Eigen::Success) {
                dir = ldlt.solve(rhs);
                if (ldlt.info() == Eigen::Success && dir.allFinite() && dir.dot(rhs) > 0.0) have_dir = true;
            }
            shift = shift == 0.0 ? 1e-10 * std::max(diag_scale, 1e-300) : shift * 100.0;
        }
        if (!have_dir) {
            dir.resize(static_cast<Eigen::Index>(nfree));
            for (std::size_t i = 0; i < E.nodes; ++i)
                if (index[i] >= 0) dir[index[i]] = rhs[index[i]] / scale[i];
        }

        const double slope = -dir.dot(rhs);
        double step = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            for (std::size_t i = 0; i < E.nodes; ++i)
                xt[i] = index[i] >= 0 ? x[i] + step * dir[index[i]] : x[i];
            const double et = E.value(xt);
            if (et <= e0 + 1e-4 * step * slope) {
                accepted = true;
            } else if (et - e0 <= 1e-13 * std::abs(e0) + 1e-300) {
                // energy differences have hit roundoff; judge by the gradient
                E.gradient(xt, gt);
                if (residual_norm(gt, free, scale) < r) accepted = true;
            }
            if (accepted) {
                x.swap(xt);
                e0 = et;
                break;
            }
            step *= 0.5;
        }
        E.gradient(x, g);
        r = residual_norm(g, free, scale);
        res.history.push_back(r);
        if (r <= cfg.tol_resolvent) {
            res.converged = true;
            break;
        }
        if (!accepted) break;
    }
    res.residual = r;
    return res;
}

PowerEnergy plaplacian_1d_energy(std::size_t n, double p, double h) {
    PowerEnergy E;
    E.p = p;
    E.nodes = n;
    E.cells.reserve(n + 1);
    for (std::size_t e = 0; e <= n; ++e) {
        Cell c;
        c.v[0] = e > 0 ? e - 1 : kGhost;
        c.v[1] = e < n ? e : kGhost;
        c.gx[0] = -1.0 / h;
        c.gx[1] = 1.0 / h;
        c.weight = h;
        E.cells.push_back(c);
    }
    return E;
}

PowerEnergy plaplacian_2d_energy(std::size_t side, double p, double h) {
    PowerEnergy E;
    E.p = p;
    E.nodes = side * side;
    auto id = [&](std::ptrdiff_t i, std::ptrdiff_t j) -> std::size_t {
        const auto s = static_cast<std::ptrdiff_t>(side);
        if (i < 0 || j < 0 || i >= s || j >= s) return kGhost;
        return static_cast<std::size_t>(j * s + i);
    };
    const auto s = static_cast<std::ptrdiff_t>(side);
    for (std::ptrdiff_t j = 0; j < s; ++j)
        for (std::ptrdiff_t i = 0; i <= s; ++i) {
            Cell c;
            c.v[0] = id(i - 1, j);
            c.v[1] = id(i, j);
            c.gx[0] = -1.0 / h;
            c.gx[1] = 1.0 / h;
            c.weight = h * h;
            E.cells.push_back(c);
        }
    for (std::ptrdiff_t i = 0; i < s; ++i)
        for (std::ptrdiff_t j = 0; j <= s; ++j) {
            Cell c;
            c.v[0] = id(i, j - 1);
            c.v[1] = id(i, j);
            c.gx[0] = -1.0 / h;
            c.gx[1] = 1.0 / h;
            c.weight = h * h;
            E.cells.push_back(c);
        }
    return E;
}

}  // namespace accretive::detail
