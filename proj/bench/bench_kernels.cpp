#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "accretive/kernels.hpp"

namespace k = accretive::kernels;

namespace {

std::vector<double> random_vector(std::size_t n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v) x = d(rng);
    return v;
}

template <bool Serial>
void BM_PowerSum(benchmark::State& st) {
    const auto n = static_cast<std::size_t>(st.range(0));
    const auto u = random_vector(n, 1);
    const std::vector<double> w(n, 1.0 / n);
    for (auto _ : st) {
        double s = Serial ? k::serial::weighted_power_sum(u, w, 3.0) : k::weighted_power_sum(u, w, 3.0);
        benchmark::DoNotOptimize(s);
    }
    st.SetItemsProcessed(st.iterations() * n);
}

template <bool Serial>
void BM_PLaplacian1D(benchmark::State& st) {
    const auto n = static_cast<std::size_t>(st.range(0));
    const auto u = random_vector(n, 2);
    std::vector<double> out(n);
    const double h = 1.0 / (n + 1);
    for (auto _ : st) {
        if (Serial)
            k::serial::plaplacian_1d(u, 3.0, h, out);
        else
            k::plaplacian_1d(u, 3.0, h, out);
        benchmark::DoNotOptimize(out.data());
    }
    st.SetItemsProcessed(st.iterations() * n);
}

template <bool Serial>
void BM_PLaplacian2D(benchmark::State& st) {
    const auto side = static_cast<std::size_t>(st.range(0));
    const auto u = random_vector(side * side, 3);
    std::vector<double> out(side * side);
    const double h = 1.0 / (side + 1);
    for (auto _ : st) {
        if (Serial)
            k::serial::plaplacian_2d(u, side, side, 3.0, h, out);
        else
            k::plaplacian_2d(u, side, side, 3.0, h, out);
        benchmark::DoNotOptimize(out.data());
    }
    st.SetItemsProcessed(st.iterations() * side * side);
}

template <bool Serial>
void BM_Thresholds(benchmark::State& st) {
    const auto n = static_cast<std::size_t>(st.range(0));
    const auto u = random_vector(n, 4);
    const std::vector<double> w(n, 1.0 / n);
    std::vector<double> ks(64);
    for (std::size_t j = 0; j < ks.size(); ++j) ks[j] = std::pow(10.0, -6.0 + 6.0 * j / 63.0);
    std::vector<double> pos(ks.size()), neg(ks.size());
    for (auto _ : st) {
        if (Serial)
            k::serial::threshold_integrals(u, w, ks, pos, neg);
        else
            k::threshold_integrals(u, w, ks, pos, neg);
        benchmark::DoNotOptimize(pos.data());
    }
    st.SetItemsProcessed(st.iterations() * n * ks.size());
}

}  // namespace

BENCHMARK(BM_PowerSum<true>)->Name("power_sum/serial")->Range(1 << 10, 1 << 20);
BENCHMARK(BM_PowerSum<false>)->Name("power_sum/parallel")->Range(1 << 10, 1 << 20);
BENCHMARK(BM_PLaplacian1D<true>)->Name("plaplacian_1d/serial")->Range(1 << 10, 1 << 20);
BENCHMARK(BM_PLaplacian1D<false>)->Name("plaplacian_1d/parallel")->Range(1 << 10, 1 << 20);
BENCHMARK(BM_PLaplacian2D<true>)->Name("plaplacian_2d/serial")->Range(32, 1024);
BENCHMARK(BM_PLaplacian2D<false>)->Name("plaplacian_2d/parallel")->Range(32, 1024);
BENCHMARK(BM_Thresholds<true>)->Name("threshold_integrals/serial")->Range(1 << 10, 1 << 18);
BENCHMARK(BM_Thresholds<false>)->Name("threshold_integrals/parallel")->Range(1 << 10, 1 << 18);

BENCHMARK_MAIN();
