// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The appraisal-annot Authors

// Portable random streams.
//
// The standard <random> distributions are implementation-defined, so every
// draw that feeds an output goes through the helpers below. The engine is
// std::mt19937_64, whose output sequence is fixed by the standard.
//
// Seed splitting: a component seed is derived from the master seed and a
// label as splitmix64(master ^ fnv1a64(label)). Labels in use:
//   "simulator.latent", "simulator.annotate", "simulator.text",
//   "folds", "train/<dimension>/<fold>".

#ifndef APPRAISAL_RANDOM_HPP
#define APPRAISAL_RANDOM_HPP

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace appraisal {

/// 64-bit FNV-1a over raw bytes.
constexpr std::uint64_t fnv1a64(std::string_view bytes) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view label) noexcept {
    return splitmix64(master ^ fnv1a64(label));
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform in (0, 1].
    double uniform_pos() { return 1.0 - uniform(); }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n), unbiased by rejection. n must be > 0.
    std::uint64_t below(std::uint64_t n);

    bool bernoulli(double p) { return uniform() < p; }

    /// Standard normal via Box-Muller (one value per call; the pair partner is cached).
    double normal();

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    /// Kumaraswamy(a, b) on (0, 1) by inverse CDF.
    double kumaraswamy(double a, double b);

    template <typename T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            auto j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

/// Standard normal CDF.
double normal_cdf(double x);

}  // namespace appraisal

#endif  // APPRAISAL_RANDOM_HPP
