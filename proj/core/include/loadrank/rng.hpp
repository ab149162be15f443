#ifndef LOADRANK_RNG_HPP
#define LOADRANK_RNG_HPP

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <vector>

namespace loadrank {

// All randomness in the library flows through the two primitives below, so
// results reproduce bit-for-bit across platforms and worker counts.

/// SplitMix64 finalizer (Steele, Lea & Flood 2014). Used both as a seed
/// expander and as the hash combiner for deriving per-task seed streams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derives a child seed from a parent seed plus a list of stream tags by
/// folding each word through SplitMix64. derive(s, {a, b}) never collides
/// with derive(s, {a, b'}) in practice, and extending the tag list leaves
/// shorter derivations untouched, which is what keeps per-(repeat, prefix)
/// seeds stable when a run grows.
inline std::uint64_t derive_seed(std::uint64_t seed,
                                 std::initializer_list<std::uint64_t> tags) {
    std::uint64_t state = seed;
    std::uint64_t out = splitmix64(state);
    for (std::uint64_t tag : tags) {
        state = out ^ tag;
        out = splitmix64(state);
    }
    return out;
}

/// PCG-XSH-RR 32-bit generator (O'Neill 2014), 64-bit state. Small, fast,
/// and identical on every platform, unlike the standard <random>
/// distributions.
class Pcg32 {
public:
    explicit Pcg32(std::uint64_t seed, std::uint64_t stream = 0) {
        state_ = 0;
        inc_ = (stream << 1) | 1u;
        next_u32();
        state_ += seed;
        next_u32();
    }

    std::uint32_t next_u32() {
        std::uint64_t old = state_;
        state_ = old * 6364136223846793005ULL + inc_;
        std::uint32_t xorshifted =
            static_cast<std::uint32_t>(((old >> 18) ^ old) >> 27);
        std::uint32_t rot = static_cast<std::uint32_t>(old >> 59);
        return (xorshifted >> rot) | (xorshifted << ((-rot) & 31u));
    }

    std::uint64_t next_u64() {
        std::uint64_t hi = next_u32();
        return (hi << 32) | next_u32();
    }

    /// Unbiased integer in [0, bound) via rejection sampling.
    std::uint32_t next_below(std::uint32_t bound) {
        std::uint32_t threshold = (-bound) % bound;
        for (;;) {
            std::uint32_t r = next_u32();
            if (r >= threshold) return r % bound;
        }
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

private:
    std::uint64_t state_;
    std::uint64_t inc_;
};

/// Standard normal deviates via Box-Muller; caches the spare value.
class GaussianGen {
public:
    explicit GaussianGen(Pcg32 rng) : rng_(rng) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v;
        do {
            u = rng_.next_double();
        } while (u <= 0.0);
        v = rng_.next_double();
        double radius = std::sqrt(-2.0 * std::log(u));
        double angle = 6.283185307179586476925286766559 * v;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    Pcg32 rng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

/// In-place Fisher-Yates shuffle driven by the given generator.
template <typename T>
void shuffle_inplace(std::vector<T>& items, Pcg32& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        std::size_t j = rng.next_below(static_cast<std::uint32_t>(i));
        std::swap(items[i - 1], items[j]);
    }
}

}  // namespace loadrank

#endif
