#pragma once

#include "rfpca/types.hpp"

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>

namespace rfpca {

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Derive an independent stream key from a parent seed and a path of
/// integer labels, e.g. (seed, row, coordinate) or (seed, tree path...).
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

/// splitmix64 generator. Cheap to construct, so one stream per sample row or
/// per Monte Carlo trial is fine. Satisfies UniformRandomBitGenerator.
class StreamRng {
public:
    using result_type = std::uint64_t;

    explicit StreamRng(std::uint64_t key) : state_(key) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        state_ += 0x9E3779B97F4A7C15ULL;
        return mix64(state_);
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    double normal() { return normal_(*this); }

private:
    std::uint64_t state_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

/// n-vector of i.i.d. N(0, scale^2) draws.
Vector gaussian_vector(StreamRng& rng, Index n, double scale = 1.0);

} // namespace rfpca
