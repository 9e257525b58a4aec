#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace linoct {

// mt19937_64 output is pinned by the standard; the distribution helpers
// below avoid <random> distributions, whose streams are
// implementation-defined, so seeded outputs stay reproducible.

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform_double(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

/// Unbiased uniform integer in [0, n), n >= 1. Masked rejection sampling.
inline std::uint64_t uniform_below(std::mt19937_64& gen, std::uint64_t n) {
    if (n <= 1) return 0;
    const int bits = 64 - std::countl_zero(n - 1);
    const std::uint64_t mask = (bits == 64) ? ~std::uint64_t{0} : ((std::uint64_t{1} << bits) - 1);
    std::uint64_t x;
    do {
        x = gen() & mask;
    } while (x >= n);
    return x;
}

/// Standard normal deviate (Box-Muller).
inline double gaussian(std::mt19937_64& gen) {
    double u1;
    do {
        u1 = uniform_double(gen);
    } while (u1 <= 0.0);
    const double u2 = uniform_double(gen);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// k distinct indices drawn uniformly from [0, n), in draw order
/// (partial Fisher-Yates). Deterministic for a given seed.
inline std::vector<std::uint32_t> sample_indices(std::uint32_t n, std::uint32_t k,
                                                 std::uint64_t seed) {
    std::vector<std::uint32_t> pool(n);
    for (std::uint32_t i = 0; i < n; ++i) pool[i] = i;
    std::mt19937_64 gen(seed);
    const std::uint32_t take = std::min(k, n);
    for (std::uint32_t i = 0; i < take; ++i) {
        const auto j = i + static_cast<std::uint32_t>(uniform_below(gen, n - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(take);
    return pool;
}

}  // namespace linoct
