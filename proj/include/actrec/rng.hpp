#pragma once

#include <cstdint>

namespace actrec {

// Deterministic counter-based generator (SplitMix64 core). The same seed
// yields the same draw sequence on every run; there is no global state.
//
// split(stream) derives an independent child generator from the *seed*, not
// from the current position, so the set of child streams a seed produces does
// not depend on how many draws the parent has made. That keeps parallel or
// reordered consumers reproducible as long as each owns a distinct stream id.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();
    // Uniform in [0, 1), 53 bits of mantissa.
    double next_double();
    // One Gaussian draw via Box-Muller; consumes exactly two uniforms.
    double next_normal(double mean, double stddev);

    Rng split(std::uint64_t stream) const;
    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
    std::uint64_t state_;
};

}  // namespace actrec
