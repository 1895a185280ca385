#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace lyaprate {

/// Stateless 64-bit finalizer from SplitMix64. Used for seeding and for
/// deriving child seeds.
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Child seed for the run at `index` of a sweep:
///   splitmix64_mix(base + (index + 1) * 0x9E3779B97F4A7C15)
/// Stable; changing it changes every sweep output.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept {
    return splitmix64_mix(base + (index + 1) * 0x9E3779B97F4A7C15ULL);
}

/**
 * xoshiro256** 1.0 (Blackman & Vigna), state seeded from a single 64-bit
 * value through four SplitMix64 outputs.
 *
 * Satisfies UniformRandomBitGenerator. Every simulation owns one instance;
 * instances must not be shared between concurrent runs.
 */
class Xoshiro256StarStar {
public:
    using result_type = std::uint64_t;

    static constexpr const char* name = "xoshiro256**";

    explicit Xoshiro256StarStar(std::uint64_t seed) noexcept {
        std::uint64_t x = seed;
        for (auto& word : state_) {
            x += 0x9E3779B97F4A7C15ULL;
            word = splitmix64_mix(x);
        }
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1) from the top 53 bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    friend bool operator==(const Xoshiro256StarStar&, const Xoshiro256StarStar&) = default;

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> state_{};
};

using Rng = Xoshiro256StarStar;

namespace detail {

// Means above this are split into chunks so exp(-mean) stays well inside
// double range during inversion.
inline constexpr double kPoissonChunk = 200.0;

inline std::int64_t poisson_inversion(double mean, Rng& rng) {
    const double u = rng.uniform();
    double p = std::exp(-mean);
    double cdf = p;
    std::int64_t k = 0;
    // Stop once the tail mass is below double resolution.
    while (u >= cdf && p > 0.0) {
        ++k;
        p *= mean / static_cast<double>(k);
        cdf += p;
    }
    return k;
}

}  // namespace detail

/// Poisson(mean) draw by sequential CDF inversion; one uniform per chunk of
/// at most 200 units of mean.
inline std::int64_t poisson(double mean, Rng& rng) {
    if (!(mean >= 0.0) || !std::isfinite(mean)) {
        throw std::invalid_argument("poisson mean must be finite and non-negative");
    }
    if (mean == 0.0) {
        return 0;
    }
    std::int64_t total = 0;
    double remaining = mean;
    while (remaining > detail::kPoissonChunk) {
        total += detail::poisson_inversion(detail::kPoissonChunk, rng);
        remaining -= detail::kPoissonChunk;
    }
    return total + detail::poisson_inversion(remaining, rng);
}

}  // namespace lyaprate
