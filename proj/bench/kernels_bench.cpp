// OpenMP kernels against their serial references.

#include <vector>

#include <benchmark/benchmark.h>
#include <omp.h>

#include "sarcbench/metrics.hpp"
#include "sarcbench/nn/kernels.hpp"
#include "sarcbench/rng.hpp"

namespace k = sarc::nn::kernels;

namespace {

std::vector<float> random_floats(std::size_t n, std::uint64_t seed) {
    sarc::Rng rng(seed);
    std::vector<float> v(n);
    for (auto& x : v) {
        x = static_cast<float>(rng.uniform() * 2.0 - 1.0);
    }
    return v;
}

// Encoder-sized shapes: 32 sequences of 64 tokens, width 256.
constexpr std::size_t kRows = 32 * 64;
constexpr std::size_t kDim = 256;

template <bool Parallel>
void BM_linear(benchmark::State& state) {
    const auto x = random_floats(kRows * kDim, 1);
    const auto w = random_floats(kDim * kDim, 2);
    const auto b = random_floats(kDim, 3);
    std::vector<float> y(kRows * kDim);
    for (auto _ : state) {
        if constexpr (Parallel) {
            k::linear(x, w, b, y, kRows, kDim, kDim);
        } else {
            k::reference::linear(x, w, b, y, kRows, kDim, kDim);
        }
        benchmark::DoNotOptimize(y.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(kRows * kDim * kDim));
}

template <bool Parallel>
void BM_layer_norm(benchmark::State& state) {
    const auto x = random_floats(kRows * kDim, 1);
    const std::vector<float> gamma(kDim, 1.0f);
    const std::vector<float> beta(kDim, 0.0f);
    std::vector<float> y(kRows * kDim), mean(kRows), rstd(kRows);
    for (auto _ : state) {
        if constexpr (Parallel) {
            k::layer_norm(x, gamma, beta, y, mean, rstd, kRows, kDim, 1e-12f);
        } else {
            k::reference::layer_norm(x, gamma, beta, y, mean, rstd, kRows, kDim, 1e-12f);
        }
        benchmark::DoNotOptimize(y.data());
    }
}

template <bool Parallel>
void BM_attention(benchmark::State& state) {
    const k::AttentionShape s{32, 64, 4, 64};
    const auto q = random_floats(s.rows() * s.dim(), 1);
    const auto kk = random_floats(s.rows() * s.dim(), 2);
    const auto v = random_floats(s.rows() * s.dim(), 3);
    const std::vector<float> mask(s.rows(), 1.0f);
    std::vector<float> probs(s.prob_size()), ctx(s.rows() * s.dim());
    for (auto _ : state) {
        if constexpr (Parallel) {
            k::attention(q, kk, v, mask, {}, probs, ctx, s);
        } else {
            k::reference::attention(q, kk, v, mask, {}, probs, ctx, s);
        }
        benchmark::DoNotOptimize(ctx.data());
    }
}

template <bool Parallel>
void BM_bootstrap(benchmark::State& state) {
    sarc::Rng rng(5);
    std::vector<std::int8_t> diff(2344);
    for (auto& d : diff) {
        d = static_cast<std::int8_t>(static_cast<int>(rng.below(3)) - 1);
    }
    for (auto _ : state) {
        auto deltas = Parallel ? sarc::kernels::bootstrap_deltas(diff, 2344, 0, 42)
                               : sarc::kernels::reference::bootstrap_deltas(diff, 2344, 0, 42);
        benchmark::DoNotOptimize(deltas.data());
    }
}

}  // namespace

BENCHMARK(BM_linear<false>)->Name("linear/reference")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_linear<true>)->Name("linear/openmp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_layer_norm<false>)->Name("layer_norm/reference")->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_layer_norm<true>)->Name("layer_norm/openmp")->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_attention<false>)->Name("attention/reference")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_attention<true>)->Name("attention/openmp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_bootstrap<false>)->Name("bootstrap/reference")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_bootstrap<true>)->Name("bootstrap/openmp")->Unit(benchmark::kMillisecond);

int main(int argc, char** argv) {
    benchmark::Initialize(&argc, argv);
    benchmark::AddCustomContext("omp_max_threads", std::to_string(omp_get_max_threads()));
    benchmark::RunSpecifiedBenchmarks();
    benchmark::Shutdown();
    return 0;
}
