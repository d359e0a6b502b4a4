#include <cstdint>
#include <span>
#include <vector>

#include "sarcbench/metrics.hpp"
#include "sarcbench/rng.hpp"

namespace sarc::kernels {

namespace {

double replicate_delta(std::span<const std::int8_t> diff, std::size_t m, std::uint64_t seed, std::size_t i) {
    Rng rng(mix_seed(seed, i));
    long long sum = 0;
    for (std::size_t k = 0; k < m; ++k) {
        sum += diff[static_cast<std::size_t>(rng.below(diff.size()))];
    }
    return static_cast<double>(sum) / static_cast<double>(m);
}

}  // namespace

std::vector<double> bootstrap_deltas(std::span<const std::int8_t> diff, std::size_t n_iterations,
                                     std::size_t resample_size, std::uint64_t seed) {
    std::vector<double> deltas(n_iterations);
    const auto n = static_cast<std::int64_t>(n_iterations);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        deltas[static_cast<std::size_t>(i)] =
            replicate_delta(diff, resample_size, seed, static_cast<std::size_t>(i));
    }
    return deltas;
}

namespace reference {

std::vector<double> bootstrap_deltas(std::span<const std::int8_t> diff, std::size_t n_iterations,
                                     std::size_t resample_size, std::uint64_t seed) {
    std::vector<double> deltas;
    deltas.reserve(n_iterations);
    for (std::size_t i = 0; i < n_iterations; ++i) {
        Rng rng(mix_seed(seed, i));
        long long correct_a_minus_b = 0;
        for (std::size_t k = 0; k < resample_size; ++k) {
            const auto pick = static_cast<std::size_t>(rng.below(diff.size()));
            correct_a_minus_b += diff[pick];
        }
        deltas.push_back(static_cast<double>(correct_a_minus_b) / static_cast<double>(resample_size));
    }
    return deltas;
}

}  // namespace reference

}  // namespace sarc::kernels
