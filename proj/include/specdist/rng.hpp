#ifndef SPECDIST_RNG_HPP
#define SPECDIST_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>

namespace specdist {

/**
 * Stateless counter-based generator.
 *
 * Every draw is a pure function of (seed, stream, a, b), so draws can be made
 * in any order or on any thread and still reproduce bit for bit. The mixing
 * function is the SplitMix64 finalizer applied along the key.
 */
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) noexcept : seed_(seed) {}

    std::uint64_t seed() const noexcept { return seed_; }

    std::uint64_t bits(std::uint64_t stream, std::uint64_t a, std::uint64_t b) const noexcept {
        std::uint64_t h = mix(seed_ + 0x9E3779B97F4A7C15ULL);
        h = mix(h ^ (stream * 0xD1B54A32D192ED03ULL));
        h = mix(h ^ (a * 0xAEF17502108EF2D9ULL + 0x632BE59BD9B4E019ULL));
        h = mix(h ^ (b * 0xF1357AEA2E62A9C5ULL + 0x8CB92BA72F3D8DD7ULL));
        return h;
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform(std::uint64_t stream, std::uint64_t a, std::uint64_t b) const noexcept {
        return static_cast<double>(bits(stream, a, b) >> 11) * 0x1.0p-53;
    }

    double uniform(std::uint64_t stream, std::uint64_t a, std::uint64_t b, double lo, double hi) const noexcept {
        return lo + (hi - lo) * uniform(stream, a, b);
    }

    /// Standard normal via Box-Muller on two sub-streams of the key.
    double normal(std::uint64_t stream, std::uint64_t a, std::uint64_t b) const noexcept {
        const double u1 = static_cast<double>((bits(stream, a, 2 * b) >> 11) + 1) * 0x1.0p-53; // (0, 1]
        const double u2 = uniform(stream, a, 2 * b + 1);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    static std::uint64_t mix(std::uint64_t z) noexcept {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_;
};

} // namespace specdist

#endif // SPECDIST_RNG_HPP
