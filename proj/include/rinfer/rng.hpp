// Seeded random number generation with explicit seed derivation.
//
// Child seeds are a pure function of a master seed and a tag path, so any
// unit of work (fold, strategy, bootstrap) draws from its own stream and
// results never depend on execution order.
#pragma once

#include "rinfer/types.hpp"

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>
#include <vector>

namespace rinfer {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// FNV-1a hash, used to fold string tags into seed derivations.
inline std::uint64_t hash_tag(std::string_view tag) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : tag) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

/// Mixes a master seed with a path of integer tags into a child seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
    std::uint64_t state = master ^ 0x6A09E667F3BCC909ull;
    splitmix64(state);
    for (std::uint64_t p : path) {
        state ^= p + 0x9E3779B97F4A7C15ull;
        splitmix64(state);
    }
    return splitmix64(state);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag) {
    return derive_seed(master, {hash_tag(tag)});
}

inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag, std::uint64_t a) {
    return derive_seed(master, {hash_tag(tag), a});
}

inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag, std::uint64_t a,
                                 std::uint64_t b) {
    return derive_seed(master, {hash_tag(tag), a, b});
}

/// Deterministic RNG. Distribution sampling is implemented here rather than
/// with std:: distributions, whose output differs between standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next() { return gen_(); }

    /// Uniform double in [0, 1).
    Scalar uniform() { return static_cast<Scalar>(gen_() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    Scalar uniform(Scalar lo, Scalar hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). Requires n > 0.
    std::uint64_t uniform_int(std::uint64_t n) {
        // Lemire's multiply-shift with rejection for exact uniformity.
        std::uint64_t x = gen_();
        __uint128_t m = static_cast<__uint128_t>(x) * n;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < n) {
            const std::uint64_t threshold = (0 - n) % n;
            while (lo < threshold) {
                x = gen_();
                m = static_cast<__uint128_t>(x) * n;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    /// Standard normal via Box-Muller.
    Scalar normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        Scalar u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const Scalar u2 = uniform();
        const Scalar r = std::sqrt(-2.0 * std::log(u1));
        constexpr Scalar two_pi = 6.283185307179586476925286766559;
        spare_ = r * std::sin(two_pi * u2);
        has_spare_ = true;
        return r * std::cos(two_pi * u2);
    }

    Scalar normal(Scalar mean, Scalar stddev) { return mean + stddev * normal(); }

    bool bernoulli(Scalar p) { return uniform() < p; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = uniform_int(i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 gen_;
    Scalar spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace rinfer
