#include "accretive/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace accretive::kernels {

namespace {

constexpr std::size_t kParallelMin = 2048;

inline double flux(double d, double p) {
    if (d == 0.0) return 0.0;
    return std::copysign(std::pow(std::abs(d), p - 1.0), d);
}

inline double signed_pow(double x, double a) {
    if (x == 0.0) return 0.0;
    return std::copysign(std::pow(std::abs(x), a), x);
}

inline double power_abs(double x, double q) {
    if (q == 1.0) return std::abs(x);
    if (q == 2.0) return x * x;
    return std::pow(std::abs(x), q);
}

inline double neg_part(double x) { return x < 0.0 ? -x : 0.0; }
inline double pos_part(double x) { return x > 0.0 ? x : 0.0; }

}  // namespace

void set_thread_count(int n) {
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

int thread_count() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void configure_threads_from_env() {
    if (const char* env = std::getenv("ACCRETIVE_FLOW_THREADS")) {
        int n = std::atoi(env);
        if (n > 0) set_thread_count(n);
    }
}

double weighted_power_sum(std::span<const double> u, std::span<const double> w, double q) {
    const std::size_t n = u.size();
    const std::size_t nblocks = (n + kBlock - 1) / kBlock;
    std::vector<double> partial(nblocks, 0.0);
    const auto nb = static_cast<std::ptrdiff_t>(nblocks);
#pragma omp parallel for schedule(static) if (n >= kParallelMin)
    for (std::ptrdiff_t b = 0; b < nb; ++b) {
        const std::size_t lo = static_cast<std::size_t>(b) * kBlock;
        const std::size_t hi = std::min(n, lo + kBlock);
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += w[i] * power_abs(u[i], q);
        partial[static_cast<std::size_t>(b)] = s;
    }
    double total = 0.0;
    for (double s : partial) total += s;
    return total;
}

double max_abs(std::span<const double> u) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(u.size());
    double m = 0.0;
#pragma omp parallel for reduction(max : m) schedule(static) if (u.size() >= kParallelMin)
    for (std::ptrdiff_t i = 0; i < n; ++i) m = std::max(m, std::abs(u[static_cast<std::size_t>(i)]));
    return m;
}

void threshold_integrals(std::span<const double> u, std::span<const double> w,
                         std::span<const double> k, std::span<double> pos, std::span<double> neg) {
    const std::ptrdiff_t nk = static_cast<std::ptrdiff_t>(k.size());
    const std::size_t n = u.size();
#pragma omp parallel for schedule(static) if (n * k.size() >= 16 * kParallelMin)
    for (std::ptrdiff_t j = 0; j < nk; ++j) {
        const double kj = k[static_cast<std::size_t>(j)];
        double sp = 0.0, sn = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            sp += w[i] * pos_part(u[i] - kj);
            sn += w[i] * neg_part(u[i] + kj);
        }
        pos[static_cast<std::size_t>(j)] = sp;
        neg[static_cast<std::size_t>(j)] = sn;
    }
}

void plaplacian_1d(std::span<const double> u, double p, double h, std::span<double> out) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(u.size());
#pragma omp parallel for schedule(static) if (u.size() >= kParallelMin)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const double ui = u[static_cast<std::size_t>(i)];
        const double left = i > 0 ? u[static_cast<std::size_t>(i - 1)] : 0.0;
        const double right = i + 1 < n ? u[static_cast<std::size_t>(i + 1)] : 0.0;
        out[static_cast<std::size_t>(i)] = (flux((ui - left) / h, p) - flux((right - ui) / h, p)) / h;
    }
}

void porous_medium_1d(std::span<const double> u, double m, double h, std::span<double> out) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(u.size());
    const double h2 = h * h;
#pragma omp parallel for schedule(static) if (u.size() >= kParallelMin)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const double c = signed_pow(u[static_cast<std::size_t>(i)], m);
        const double l = i > 0 ? signed_pow(u[static_cast<std::size_t>(i - 1)], m) : 0.0;
        const double r = i + 1 < n ? signed_pow(u[static_cast<std::size_t>(i + 1)], m) : 0.0;
        out[static_cast<std::size_t>(i)] = -(l - 2.0 * c + r) / h2;
    }
}

void plaplacian_2d(std::span<const double> u, std::size_t nx, std::size_t ny, double p, double h,
                   std::span<double> out) {
    const std::ptrdiff_t total = static_cast<std::ptrdiff_t>(nx * ny);
#pragma omp parallel for schedule(static) if (u.size() >= kParallelMin)
    for (std::ptrdiff_t idx = 0; idx < total; ++idx) {
        const std::size_t i = static_cast<std::size_t>(idx) % nx;
        const std::size_t j = static_cast<std::size_t>(idx) / nx;
        const double c = u[static_cast<std::size_t>(idx)];
        const double w = i > 0 ? u[j * nx + i - 1] : 0.0;
        const double e = i + 1 < nx ? u[j * nx + i + 1] : 0.0;
        const double s = j > 0 ? u[(j - 1) * nx + i] : 0.0;
        const double nn = j + 1 < ny ? u[(j + 1) * nx + i] : 0.0;
        out[static_cast<std::size_t>(idx)] =
            flux((c - w) / h, p) / h - flux((e - c) / h, p) / h + flux((c - s) / h, p) / h - flux((nn - c) / h, p) / h;
    }
}

void signed_power(std::span<const double> u, double alpha, std::span<double> out) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(u.size());
#pragma omp parallel for schedule(static) if (u.size() >= kParallelMin)
    for (std::ptrdiff_t i = 0; i < n; ++i)
        out[static_cast<std::size_t>(i)] = signed_pow(u[static_cast<std::size_t>(i)], alpha);
}

void soft_threshold(std::span<const double> v, double lambda, std::span<double> out) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(v.size());
#pragma omp parallel for schedule(static) if (v.size() >= kParallelMin)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const double x = v[static_cast<std::size_t>(i)];
        out[static_cast<std::size_t>(i)] = std::copysign(std::max(std::abs(x) - lambda, 0.0), x);
    }
}

namespace serial {

double weighted_power_sum(std::span<const double> u, std::span<const double> w, double q) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += w[i] * std::pow(std::abs(u[i]), q);
    return s;
}

double max_abs(std::span<const double> u) {
    double m = 0.0;
    for (double x : u) m = std::max(m, std::abs(x));
    return m;
}

void threshold_integrals(std::span<const double> u, std::span<const double> w,
                         std::span<const double> k, std::span<double> pos, std::span<double> neg) {
    for (std::size_t j = 0; j < k.size(); ++j) {
        pos[j] = 0.0;
        neg[j] = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            pos[j] += w[i] * std::max(u[i] - k[j], 0.0);
            neg[j] += w[i] * std::max(-(u[i] + k[j]), 0.0);
        }
    }
}

void plaplacian_1d(std::span<const double> u, double p, double h, std::span<double> out) {
    const std::size_t n = u.size();
    std::vector<double> g(n + 1);
    for (std::size_t e = 0; e <= n; ++e) {
        const double a = e > 0 ? u[e - 1] : 0.0;
        const double b = e < n ? u[e] : 0.0;
        g[e] = flux((b - a) / h, p);
    }
    for (std::size_t i = 0; i < n; ++i) out[i] = -(g[i + 1] - g[i]) / h;
}

void porous_medium_1d(std::span<const double> u, double m, double h, std::span<double> out) {
    const std::size_t n = u.size();
    std::vector<double> phi(n + 2, 0.0);
    for (std::size_t i = 0; i < n; ++i) phi[i + 1] = signed_pow(u[i], m);
    for (std::size_t i = 0; i < n; ++i) out[i] = -(phi[i] - 2.0 * phi[i + 1] + phi[i + 2]) / (h * h);
}

void plaplacian_2d(std::span<const double> u, std::size_t nx, std::size_t ny, double p, double h,
                   std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    auto at = [&](std::ptrdiff_t i, std::ptrdiff_t j) -> double {
        if (i < 0 || j < 0 || i >= static_cast<std::ptrdiff_t>(nx) || j >= static_cast<std::ptrdiff_t>(ny))
            return 0.0;
        return u[static_cast<std::size_t>(j) * nx + static_cast<std::size_t>(i)];
    };
    auto add = [&](std::ptrdiff_t i, std::ptrdiff_t j, double v) {
        if (i < 0 || j < 0 || i >= static_cast<std::ptrdiff_t>(nx) || j >= static_cast<std::ptrdiff_t>(ny))
            return;
        out[static_cast<std::size_t>(j) * nx + static_cast<std::size_t>(i)] += v;
    };
    const auto sx = static_cast<std::ptrdiff_t>(nx);
    const auto sy = static_cast<std::ptrdiff_t>(ny);
    // x-edges between (i-1, j) and (i, j)
    for (std::ptrdiff_t j = 0; j < sy; ++j) {
        for (std::ptrdiff_t i = 0; i <= sx; ++i) {
            const double g = flux((at(i, j) - at(i - 1, j)) / h, p) / h;
            add(i, j, g);
            add(i - 1, j, -g);
        }
    }
    for (std::ptrdiff_t i = 0; i < sx; ++i) {
        for (std::ptrdiff_t j = 0; j <= sy; ++j) {
            const double g = flux((at(i, j) - at(i, j - 1)) / h, p) / h;
            add(i, j, g);
            add(i, j - 1, -g);
        }
    }
}

void signed_power(std::span<const double> u, double alpha, std::span<double> out) {
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = signed_pow(u[i], alpha);
}

void soft_threshold(std::span<const double> v, double lambda, std::span<double> out) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] > lambda)
            out[i] = v[i] - lambda;
        else if (v[i] < -lambda)
            out[i] = v[i] + lambda;
        else
            out[i] = 0.0;
    }
}

}  // namespace serial

}  // namespace accretive::kernels
