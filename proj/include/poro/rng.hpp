#pragma once

#include <cstdint>

#include "poro/types.hpp"

namespace poro {

/// SplitMix64. Every piece of randomness in the test and experiment harness
/// flows from one of these so results are reproducible and portable across
/// languages: state advances by 0x9E3779B97F4A7C15 and the output mixing is
/// the standard (x ^= x>>30, *= 0xBF58476D1CE4E5B9, ...) sequence.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1): top 53 bits scaled by 2^-53.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    /// Uniform integer in [lo, hi] (inclusive); small ranges only.
    Index uniform_index(Index lo, Index hi) {
        return lo + static_cast<Index>(next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
    }

private:
    std::uint64_t state_;
};

/// Entries uniform in [-1, 1), filled row-major.
DenseMatrix random_matrix(SplitMix64& rng, Index rows, Index cols);

/// R^T R + shift*I with R as above; well conditioned for shift ~ 0.5.
DenseMatrix random_spd(SplitMix64& rng, Index n, double shift = 0.5);

Vector random_vector(SplitMix64& rng, Index n, double lo = -1.0, double hi = 1.0);

}  // namespace poro
