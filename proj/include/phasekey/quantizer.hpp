#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>

#include "phasekey/bits.hpp"
#include "phasekey/numeric.hpp"
#include "phasekey/rng.hpp"

namespace phasekey {

/// Uniform phase quantizer with q sectors. q must be a power of two for the
/// Gray bit encoding (each index carries log2(q) bits).
struct QuantizerConfig {
    int q;

    explicit QuantizerConfig(int q_) : q(q_) {
        if (q < 2) throw std::invalid_argument("QuantizerConfig: q must be >= 2");
        if (!is_power_of_two(static_cast<std::size_t>(q)))
            throw std::invalid_argument("QuantizerConfig: q must be a power of 2");
    }

    int bits_per_index() const {
        int b = 0;
        for (int v = q; v > 1; v >>= 1) ++b;
        return b;
    }
};

/// Sector index k in {1..q}: theta in [2*pi (k-1)/q, 2*pi k/q). Closed-left
/// convention; the caller reduces theta into [0, 2*pi) first.
inline int quantize_phase(double theta, int q) {
    if (q < 1) throw std::invalid_argument("quantize_phase: q must be >= 1");
    if (!(theta >= 0.0) || !(theta < kTwoPi))
        throw std::invalid_argument("quantize_phase: theta must lie in [0, 2*pi)");
    int k = static_cast<int>(std::floor(theta * static_cast<double>(q) / kTwoPi)) + 1;
    if (k > q) k = q; // guard against rounding at the upper seam
    return k;
}

inline int bits_for_q(int q) {
    if (q < 2 || !is_power_of_two(static_cast<std::size_t>(q)))
        throw std::invalid_argument("bits_for_q: q must be a power of 2, >= 2");
    int b = 0;
    for (int v = q; v > 1; v >>= 1) ++b;
    return b;
}

/// Reflected binary Gray code of (k-1) in log2(q) bits, MSB first.
/// Adjacent indices, including the q <-> 1 wraparound, differ in one bit.
inline BitVector gray_encode(int k, int q) {
    const int nbits = bits_for_q(q);
    if (k < 1 || k > q) throw std::invalid_argument("gray_encode: index out of range");
    const unsigned g = static_cast<unsigned>(k - 1) ^ (static_cast<unsigned>(k - 1) >> 1);
    BitVector out;
    for (int b = nbits - 1; b >= 0; --b) out.push_back(static_cast<int>((g >> b) & 1u));
    return out;
}

inline int gray_decode(const BitVector& bits, int q) {
    const int nbits = bits_for_q(q);
    if (static_cast<int>(bits.size()) != nbits)
        throw std::invalid_argument("gray_decode: bit length mismatch");
    unsigned g = 0;
    for (int i = 0; i < nbits; ++i) g = (g << 1) | static_cast<unsigned>(bits[i]);
    unsigned v = 0;
    for (; g; g >>= 1) v ^= g;
    return static_cast<int>(v) + 1;
}

/// Average probability that both ends' phase estimates land in the true
/// sector, for independent zero-mean Gaussian estimation errors with
/// variance sigma_theta2. This is the dominant-term value: agreements in a
/// common wrong sector are not counted (see p_qia_monte_carlo for those).
inline double p_qia(double sigma_theta2, int q) {
    if (!(sigma_theta2 > 0.0) || !std::isfinite(sigma_theta2))
        throw std::invalid_argument("p_qia: sigma_theta2 must be positive");
    if (q < 1) throw std::invalid_argument("p_qia: q must be >= 1");
    if (q == 1) return 1.0;

    const double w = kTwoPi / static_cast<double>(q);
    const double sigma = std::sqrt(sigma_theta2);
    // By symmetry every sector contributes the same average; integrate over
    // one sector with the true phase uniform inside it.
    const auto integrand = [w, sigma](double u) {
        const double p = normal_cdf((1.0 - u) * w / sigma) - normal_cdf(-u * w / sigma);
        return p * p;
    };
    return adaptive_simpson(integrand, 0.0, 1.0, 1e-9);
}

/// Monte Carlo reference for the full agreement probability, counting
/// agreements in every sector with wraparound. Always >= the dominant-term
/// approximation up to sampling error.
inline double p_qia_monte_carlo(double sigma_theta2, int q, std::size_t trials, Rng& rng) {
    if (!(sigma_theta2 >= 0.0) || !std::isfinite(sigma_theta2))
        throw std::invalid_argument("p_qia_monte_carlo: sigma_theta2 must be >= 0");
    if (q < 1) throw std::invalid_argument("p_qia_monte_carlo: q must be >= 1");
    if (trials == 0) throw std::invalid_argument("p_qia_monte_carlo: trials must be >= 1");

    const double sigma = std::sqrt(sigma_theta2);
    std::size_t agree = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        const double theta = rng.uniform(0.0, kTwoPi);
        const double a = wrap_to_2pi(theta + sigma * rng.gaussian());
        const double b = wrap_to_2pi(theta + sigma * rng.gaussian());
        if (quantize_phase(a, q) == quantize_phase(b, q)) ++agree;
    }
    return static_cast<double>(agree) / static_cast<double>(trials);
}

/// Bit error probability implied by an index-agreement probability:
/// 1 - P_QIA without coding; disagreements land in adjacent sectors with
/// Gray coding, flipping one of the log2(q) bits.
inline double predicted_ber(double p_qia_value, int q, bool gray) {
    if (!(p_qia_value >= 0.0 && p_qia_value <= 1.0))
        throw std::invalid_argument("predicted_ber: probability out of range");
    const double miss = 1.0 - p_qia_value;
    if (!gray) return miss;
    return miss / static_cast<double>(bits_for_q(q));
}

} // namespace phasekey
