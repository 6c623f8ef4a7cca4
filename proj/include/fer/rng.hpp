#pragma once

#include <cstdint>

namespace fer {

/// Deterministic PRNG: xoshiro256** (Blackman & Vigna) with the state
/// expanded from a 64-bit seed via splitmix64. Pure 64-bit integer
/// arithmetic, so identical seeds give identical sequences on every
/// platform. All stochastic operations in this library take explicit
/// seeds and draw from this generator only.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    /// Uniform draw in [lo, hi). Throws ValidationError if lo >= hi.
    double uniform(double lo, double hi);

    /// Uniform draw in [0, 1) with 53 random bits.
    double unit();

    /// Standard normal via Box-Muller on two unit draws.
    double normal();

    /// Fisher-Yates index in [0, bound).
    std::uint64_t below(std::uint64_t bound);

private:
    std::uint64_t state_[4];
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

/// Derives an independent stream seed from a base seed and a stream tag
/// (splitmix64 finalizer over the xor of both). Used wherever one global
/// seed has to fan out into per-layer, per-machine, or per-job seeds.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace fer
