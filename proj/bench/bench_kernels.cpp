// Serial reference kernels against the OpenMP kernels on backbone-sized work.

#include <benchmark/benchmark.h>

#include <vector>

#include "gait/kernels.hpp"
#include "gait/rng.hpp"

namespace k = gait::kernels;

namespace {

std::vector<double> random_values(std::size_t n, std::uint64_t seed) {
    gait::Rng rng(seed);
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(-1.0, 1.0);
    return v;
}

k::Conv3dGeometry block_geometry(std::size_t channels) {
    k::Conv3dGeometry g;
    g.c_in = channels;
    g.c_out = channels;
    g.t_in = 30;
    g.h_in = 16;
    g.w_in = 11;
    g.k_t = g.k_h = g.k_w = 3;
    g.pad = {1, 1, 1};
    return g;
}

template <bool Serial>
void BM_Conv3dForward(benchmark::State& state) {
    const auto g = block_geometry(static_cast<std::size_t>(state.range(0)));
    auto in = random_values(g.c_in * g.t_in * g.h_in * g.w_in, 1);
    auto w = random_values(g.c_out * g.c_in * 27, 2);
    auto b = random_values(g.c_out, 3);
    std::vector<double> out(g.out_size());
    k::set_workers(static_cast<int>(state.range(1)));
    for (auto _ : state) {
        if constexpr (Serial) {
            k::serial::conv3d_forward(g, in, w, b, out);
        } else {
            k::conv3d_forward(g, in, w, b, out);
        }
        benchmark::DoNotOptimize(out.data());
    }
}

template <bool Serial>
void BM_Conv3dBackward(benchmark::State& state) {
    const auto g = block_geometry(static_cast<std::size_t>(state.range(0)));
    auto in = random_values(g.c_in * g.t_in * g.h_in * g.w_in, 1);
    auto w = random_values(g.c_out * g.c_in * 27, 2);
    auto go = random_values(g.out_size(), 3);
    std::vector<double> gi(in.size()), gw(w.size()), gb(g.c_out);
    k::set_workers(static_cast<int>(state.range(1)));
    for (auto _ : state) {
        if constexpr (Serial) {
            k::serial::conv3d_backward_input(g, go, w, gi);
            k::serial::conv3d_backward_kernel(g, go, in, gw, gb);
        } else {
            k::conv3d_backward_input(g, go, w, gi);
            k::conv3d_backward_kernel(g, go, in, gw, gb);
        }
        benchmark::DoNotOptimize(gi.data());
        benchmark::DoNotOptimize(gw.data());
    }
}

template <bool Serial>
void BM_Linear(benchmark::State& state) {
    const std::size_t n = 64, d_in = static_cast<std::size_t>(state.range(0)), d_out = 64;
    auto x = random_values(n * d_in, 1);
    auto w = random_values(d_in * d_out, 2);
    auto b = random_values(d_out, 3);
    std::vector<double> out(n * d_out), gx(x.size()), gw(w.size()), gb(d_out);
    k::set_workers(static_cast<int>(state.range(1)));
    for (auto _ : state) {
        if constexpr (Serial) {
            k::serial::linear_forward(n, d_in, d_out, x, w, b, out);
            k::serial::linear_backward(n, d_in, d_out, out, x, w, gx, gw, gb);
        } else {
            k::linear_forward(n, d_in, d_out, x, w, b, out);
            k::linear_backward(n, d_in, d_out, out, x, w, gx, gw, gb);
        }
        benchmark::DoNotOptimize(gx.data());
    }
}

void worker_args(benchmark::internal::Benchmark* b, std::vector<int64_t> sizes) {
    for (auto s : sizes)
        for (int w : {1, 2, 4}) b->Args({s, w});
}

}  // namespace

BENCHMARK(BM_Conv3dForward<true>)->Apply([](auto* b) { worker_args(b, {4, 8}); });
BENCHMARK(BM_Conv3dForward<false>)->Apply([](auto* b) { worker_args(b, {4, 8}); });
BENCHMARK(BM_Conv3dBackward<true>)->Apply([](auto* b) { worker_args(b, {4, 8}); });
BENCHMARK(BM_Conv3dBackward<false>)->Apply([](auto* b) { worker_args(b, {4, 8}); });
BENCHMARK(BM_Linear<true>)->Apply([](auto* b) { worker_args(b, {256, 1024}); });
BENCHMARK(BM_Linear<false>)->Apply([](auto* b) { worker_args(b, {256, 1024}); });

BENCHMARK_MAIN();
