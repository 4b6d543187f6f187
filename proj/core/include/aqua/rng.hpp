#pragma once

#include <cstdint>
#include <string_view>

namespace aqua {

/// Deterministic 64-bit RNG (xoshiro256++ seeded through splitmix64).
/// The sequence is pinned by this implementation, not by the standard
/// library, so seeded runs are reproducible across compilers and platforms.
/// Each worker owns its own stream; see derive_stream.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    /// Uniform double in [0, 1).
    double uniform();
    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi);
    /// Uniform integer in [0, n). n must be > 0.
    std::uint64_t uniform_int(std::uint64_t n);

    /// Stream seed for an independent per-item RNG, derived from the global
    /// seed, a stable string id and an index. Scheduling and worker count
    /// never enter the derivation.
    static std::uint64_t derive_stream(std::uint64_t global_seed, std::string_view id,
                                       std::uint64_t index);

private:
    std::uint64_t state_[4];
};

/// FNV-1a hash of a byte string; used for stable ids and content hashes.
std::uint64_t fnv1a(std::string_view bytes);

} // namespace aqua
