#pragma once

#include <cstddef>
#include <span>

// Data-parallel building blocks. Reductions are summed over fixed-size blocks
// and then combined in block order, so results do not depend on the thread
// count. The `serial` namespace holds straightforward loops used as the
// reference in tests and benchmarks.

namespace accretive::kernels {

inline constexpr std::size_t kBlock = 1024;

/// Caps the OpenMP team size; 0 leaves the runtime default.
void set_thread_count(int n);
int thread_count();
/// Reads ACCRETIVE_FLOW_THREADS if set.
void configure_threads_from_env();

/// Σ w_i |u_i|^q for finite q >= 1.
double weighted_power_sum(std::span<const double> u, std::span<const double> w, double q);
double max_abs(std::span<const double> u);

/// For each threshold k_j: pos[j] = Σ w [u-k_j]^+, neg[j] = Σ w [u+k_j]^-.
void threshold_integrals(std::span<const double> u, std::span<const double> w,
                         std::span<const double> k, std::span<double> pos, std::span<double> neg);

/// out = -D_-(|D_+u|^{p-2} D_+u) with zero Dirichlet ghosts, spacing h.
void plaplacian_1d(std::span<const double> u, double p, double h, std::span<double> out);

/// out = -Δ_h(|u|^{m-1}u) with zero Dirichlet ghosts.
void porous_medium_1d(std::span<const double> u, double m, double h, std::span<double> out);

/// Edge-wise 2D p-Laplacian on an nx-by-ny interior grid (row-major, x fastest).
void plaplacian_2d(std::span<const double> u, std::size_t nx, std::size_t ny, double p, double h,
                   std::span<double> out);

/// out_i = |u_i|^{alpha-1} u_i.
void signed_power(std::span<const double> u, double alpha, std::span<double> out);

/// out_i = sign(v_i) max(|v_i| - lambda, 0).
void soft_threshold(std::span<const double> v, double lambda, std::span<double> out);

namespace serial {

double weighted_power_sum(std::span<const double> u, std::span<const double> w, double q);
double max_abs(std::span<const double> u);
void threshold_integrals(std::span<const double> u, std::span<const double> w,
                         std::span<const double> k, std::span<double> pos, std::span<double> neg);
void plaplacian_1d(std::span<const double> u, double p, double h, std::span<double> out);
void porous_medium_1d(std::span<const double> u, double m, double h, std::span<double> out);
void plaplacian_2d(std::span<const double> u, std::size_t nx, std::size_t ny, double p, double h,
                   std::span<double> out);
void signed_power(std::span<const double> u, double alpha, std::span<double> out);
void soft_threshold(std::span<const double> v, double lambda, std::span<double> out);

}  // namespace serial

}  // namespace accretive::kernels
