#pragma once

#include <cstdint>
#include <vector>

namespace streambank {

// splitmix64 finalizer; good avalanche, cheap to compute.
std::uint64_t mix64(std::uint64_t x);

// Derives a child seed from a parent seed and a salt (e.g. a frame index).
std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value);

// Deterministic generator on a splitmix64 stream.  Normal deviates come from
// Box-Muller with the spare value cached, so draw order is reproducible.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64();

    // Uniform in [0, 1).
    double next_double();

    // Standard normal.
    double normal();

    // Uniform integer in [0, n); n must be positive.
    std::uint32_t below(std::uint32_t n);

    // Fisher-Yates shuffle of 0..n-1.
    std::vector<std::uint32_t> permutation(std::uint32_t n);

private:
    std::uint64_t state_ = 0;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace streambank
