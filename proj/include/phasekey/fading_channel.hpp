#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>

#include "phasekey/numeric.hpp"
#include "phasekey/rng.hpp"
#include "phasekey/sample_vector.hpp"

namespace phasekey {

/// Narrowband block-fading channel parameters. Both quadrature components
/// are zero-mean Gaussian with variance sigma_h2, so the envelope is
/// Rayleigh with E[alpha^2] = 2*sigma_h2 and the phase is uniform.
struct ChannelParams {
    double sigma_h2;
    double coherence_time_s;

    ChannelParams(double sigma_h2_, double coherence_time)
        : sigma_h2(sigma_h2_), coherence_time_s(coherence_time) {
        if (!(sigma_h2 > 0.0) || !std::isfinite(sigma_h2))
            throw std::invalid_argument("ChannelParams: sigma_h2 must be positive");
        if (!(coherence_time_s > 0.0) || !std::isfinite(coherence_time_s))
            throw std::invalid_argument("ChannelParams: coherence time must be positive");
    }

    /// RMS envelope sqrt(E[alpha^2]).
    double rms_amplitude() const { return std::sqrt(2.0 * sigma_h2); }
};

/// One coherence-interval draw of the channel.
struct ChannelRealization {
    double in_phase = 0.0;
    double quadrature = 0.0;
    double amplitude = 0.0;   // |h|
    double phase = 0.0;       // in [0, 2*pi)

    static ChannelRealization from_components(double i, double q) {
        ChannelRealization c;
        c.in_phase = i;
        c.quadrature = q;
        c.amplitude = std::hypot(i, q);
        c.phase = wrap_to_2pi(std::atan2(q, i));
        return c;
    }
};

struct NoiseParams {
    double sigma2;

    explicit NoiseParams(double sigma2_) : sigma2(sigma2_) {
        if (!(sigma2 >= 0.0) || !std::isfinite(sigma2))
            throw std::invalid_argument("NoiseParams: sigma2 must be >= 0");
    }
};

/// Draws one legitimate-link realization for a fresh coherence interval.
inline ChannelRealization sample_channel(Rng& rng, const ChannelParams& params) {
    const double s = std::sqrt(params.sigma_h2);
    const double i = rng.gaussian(0.0, s);
    const double q = rng.gaussian(0.0, s);
    return ChannelRealization::from_components(i, q);
}

/// The forward and backward directions of a TDD link share one realization
/// inside a coherence interval.
inline std::pair<ChannelRealization, ChannelRealization> reciprocal_pair(
    const ChannelRealization& realization) {
    return {realization, realization};
}

/// Eavesdropper links fade independently of every legitimate link; callers
/// must hand this a dedicated sub-stream.
inline ChannelRealization eavesdropper_channel(Rng& rng, const ChannelParams& params) {
    return sample_channel(rng, params);
}

/// I.i.d. zero-mean Gaussian noise samples with variance sigma2.
inline SampleVector awgn(std::size_t length, double sigma2, Rng& rng,
                         double sample_rate_hz = 1.0, double start_time_s = 0.0) {
    if (length == 0) throw std::invalid_argument("awgn: length must be >= 1");
    if (!(sigma2 >= 0.0) || !std::isfinite(sigma2))
        throw std::invalid_argument("awgn: sigma2 must be >= 0");
    std::vector<double> out(length, 0.0);
    if (sigma2 > 0.0) {
        const double s = std::sqrt(sigma2);
        for (double& v : out) v = rng.gaussian(0.0, s);
    }
    return SampleVector(std::move(out), sample_rate_hz, start_time_s);
}

} // namespace phasekey
