#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "accretive/core.hpp"

namespace accretive::detail {

inline constexpr std::size_t kGhost = static_cast<std::size_t>(-1);

/// One quadrature cell: g = Σ_k (gx_k, gy_k) x[v_k]; ghost vertices read zero.
struct Cell {
    std::array<std::size_t, 3> v{kGhost, kGhost, kGhost};
    std::array<double, 3> gx{0, 0, 0};
    std::array<double, 3> gy{0, 0, 0};
    double weight = 0.0;
};

/// E(x) = Σ_cells w |g|^p / p + Σ_i mass_i |x_i|^p / p
///      + Σ_i prox_i (x_i - target_i)^2 / 2
struct PowerEnergy {
    double p = 2.0;
    std::size_t nodes = 0;
    std::vector<Cell> cells;
    std::vector<double> mass;    ///< empty or size `nodes`
    std::vector<double> prox;    ///< empty or size `nodes`
    std::vector<double> target;  ///< same size as prox

    double value(const std::vector<double>& x) const;
    /// Full gradient over all nodes.
    void gradient(const std::vector<double>& x, std::vector<double>& g) const;
};

struct MinimizeResult {
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> history;
};

/// Damped Newton with Armijo backtracking; shifts the Hessian when the
/// factorization fails and falls back to scaled gradient descent.
/// Residual: sqrt(Σ_free g_i^2 / scale_i). Nodes with free[i] == 0 keep x[i].
MinimizeResult minimize(const PowerEnergy& energy, const std::vector<char>& free,
                        const std::vector<double>& scale, std::vector<double>& x, const SolverConfig& cfg);

PowerEnergy plaplacian_1d_energy(std::size_t n, double p, double h);
PowerEnergy plaplacian_2d_energy(std::size_t side, double p, double h);

}  // namespace accretive::detail
