#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace biascorr {

// Independent RNG streams derived from one user seed. Every fitting routine
// draws from its own stream so that, e.g., skipping the selection-classifier
// fit never perturbs the draws used by the main estimator.
namespace rng_stream {
inline constexpr std::uint64_t draws = 1;
inline constexpr std::uint64_t selection_classifier = 2;
inline constexpr std::uint64_t label_classifier = 3;
inline constexpr std::uint64_t init = 4;
inline constexpr std::uint64_t split = 5;
inline constexpr std::uint64_t synth = 6;
inline constexpr std::uint64_t augment = 7;
inline constexpr std::uint64_t masking = 8;
inline constexpr std::uint64_t batches = 9;
}  // namespace rng_stream

/// Deterministic random source: mt19937_64 plus a hand-rolled Box-Muller
/// normal so results do not depend on the standard library's distribution
/// implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                          static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream & 0xffffffffu),
                          static_cast<std::uint32_t>(stream >> 32)};
        gen_.seed(seq);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller; second value of each pair is cached.
    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586477 * u2;
        cached_ = r * std::sin(a);
        have_cached_ = true;
        return r * std::cos(a);
    }

    /// Unbiased uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v;
        do {
            v = gen_();
        } while (v >= limit);
        return v % n;
    }

private:
    std::mt19937_64 gen_;
    bool have_cached_ = false;
    double cached_ = 0.0;
};

}  // namespace biascorr
