#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace phasekey {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t mix_word(std::uint64_t seed, std::uint64_t word) {
    std::uint64_t s = seed ^ (word + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
    return splitmix64(s);
}

} // namespace detail

/// Derives a child seed from a root seed, a stream label and up to three
/// stream indices. Any component can be replayed in isolation by
/// reconstructing the same (label, indices) tuple.
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view label,
                                 std::uint64_t i0 = 0, std::uint64_t i1 = 0,
                                 std::uint64_t i2 = 0) {
    std::uint64_t h = 0xcbf29ce484222325ULL; // FNV-1a over the label
    for (char c : label) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    std::uint64_t s = detail::mix_word(root, h);
    s = detail::mix_word(s, i0);
    s = detail::mix_word(s, i1);
    s = detail::mix_word(s, i2);
    return s;
}

/// Seedable random source. Gaussian variates come from an explicit
/// Box-Muller transform rather than std::normal_distribution, so streams
/// are reproducible bit-for-bit across standard-library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed) {
        std::uint64_t s = seed;
        std::seed_seq seq{detail::splitmix64(s), detail::splitmix64(s),
                          detail::splitmix64(s), detail::splitmix64(s)};
        engine_.seed(seq);
    }

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Standard normal variate (Box-Muller, pair cached).
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform01();
        } while (u1 <= 0.0);
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    double gaussian(double mean, double stddev) { return mean + stddev * gaussian(); }

    /// Independent labeled sub-stream. Derivation depends only on this
    /// stream's seed, never on how much of it has been consumed.
    Rng substream(std::string_view label, std::uint64_t i0 = 0,
                  std::uint64_t i1 = 0, std::uint64_t i2 = 0) const {
        return Rng(derive_seed(seed_, label, i0, i1, i2));
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace phasekey
