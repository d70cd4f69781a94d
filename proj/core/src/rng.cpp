#include "streambank/rng.hpp"

#include <cmath>
#include <numbers>

#include "streambank/errors.hpp"

namespace streambank {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;
}

std::uint64_t mix64(std::uint64_t x) {
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) {
    return mix64(mix64(seed) ^ (mix64(value) + kGolden));
}

std::uint64_t Rng::next_u64() {
    state_ += kGolden;
    return mix64(state_);
}

double Rng::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // u1 in (0, 1] keeps log finite.
    double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    double u2 = next_double();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

std::uint32_t Rng::below(std::uint32_t n) {
    if (n == 0) {
        throw ConfigError("Rng::below requires n > 0");
    }
    return static_cast<std::uint32_t>(next_u64() % n);
}

std::vector<std::uint32_t> Rng::permutation(std::uint32_t n) {
    std::vector<std::uint32_t> p(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        p[i] = i;
    }
    for (std::uint32_t i = n; i > 1; --i) {
        std::uint32_t j = below(i);
        std::swap(p[i - 1], p[j]);
    }
    return p;
}

} // namespace streambank
