#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "phasekey/fading_channel.hpp"
#include "phasekey/numeric.hpp"
#include "phasekey/rng.hpp"
#include "phasekey/sample_vector.hpp"

namespace phasekey {

/// Single-tone beacon description. Transmit power is P = a^2 / 2.
struct BeaconSpec {
    double amplitude_a;
    double carrier_freq_hz;
    double duration_s;
    double sample_rate_hz;
    double start_time_s = 0.0;

    BeaconSpec(double a, double fc_hz, double duration, double fs_hz, double t0 = 0.0)
        : amplitude_a(a), carrier_freq_hz(fc_hz), duration_s(duration),
          sample_rate_hz(fs_hz), start_time_s(t0) {
        validate();
    }

    void validate() const {
        if (!(amplitude_a > 0.0) || !std::isfinite(amplitude_a))
            throw std::invalid_argument("BeaconSpec: amplitude must be positive");
        if (!(carrier_freq_hz > 0.0) || !std::isfinite(carrier_freq_hz))
            throw std::invalid_argument("BeaconSpec: carrier frequency must be positive");
        if (!(duration_s > 0.0) || !std::isfinite(duration_s))
            throw std::invalid_argument("BeaconSpec: duration must be positive");
        if (!(sample_rate_hz > 2.0 * carrier_freq_hz))
            throw std::invalid_argument("BeaconSpec: sample rate must exceed twice the carrier");
        if (!std::isfinite(start_time_s))
            throw std::invalid_argument("BeaconSpec: start time must be finite");
        if (n_samples() < 16)
            throw std::invalid_argument("BeaconSpec: fewer than 16 samples in the observation");
    }

    std::size_t n_samples() const {
        return static_cast<std::size_t>(std::floor(duration_s * sample_rate_hz));
    }

    double power() const { return 0.5 * amplitude_a * amplitude_a; }

    double omega_c() const { return kTwoPi * carrier_freq_hz; }

    BeaconSpec with_start_time(double t0) const {
        BeaconSpec s = *this;
        s.start_time_s = t0;
        return s;
    }
};

/// Steady-state observation of a faded tone in AWGN:
///   samples[m] = a * alpha * cos(w_c (t0 + m Ts) + theta) + n[m].
/// Transients at the slot edges never enter an estimate, so only the
/// steady-state segment is synthesized.
inline SampleVector received_tone(const BeaconSpec& spec, const ChannelRealization& channel,
                                  double sigma2, Rng& rng) {
    spec.validate();
    if (!std::isfinite(channel.amplitude) || !std::isfinite(channel.phase))
        throw std::invalid_argument("received_tone: non-finite channel realization");
    if (!(sigma2 >= 0.0) || !std::isfinite(sigma2))
        throw std::invalid_argument("received_tone: sigma2 must be >= 0");

    const std::size_t n = spec.n_samples();
    const double ts = 1.0 / spec.sample_rate_hz;
    const double scale = spec.amplitude_a * channel.amplitude;
    const double wc = spec.omega_c();

    std::vector<double> out(n);
    if (sigma2 > 0.0) {
        const double s = std::sqrt(sigma2);
        for (std::size_t m = 0; m < n; ++m) {
            const double t = spec.start_time_s + static_cast<double>(m) * ts;
            out[m] = scale * std::cos(wc * t + channel.phase) + rng.gaussian(0.0, s);
        }
    } else {
        for (std::size_t m = 0; m < n; ++m) {
            const double t = spec.start_time_s + static_cast<double>(m) * ts;
            out[m] = scale * std::cos(wc * t + channel.phase);
        }
    }
    return SampleVector(std::move(out), spec.sample_rate_hz, spec.start_time_s);
}

/// Noise variance that realizes a target received SNR, using the identity
/// SNR = 2 sigma_h2 P / sigma^2 with P = a^2/2. Equivalently
/// sigma^2 = a_r^2 / (2 SNR) where a_r^2 = 2 sigma_h2 a^2 is the expected
/// received power.
inline double snr_to_sigma2(const BeaconSpec& spec, double sigma_h2, double snr_linear) {
    if (!(snr_linear > 0.0) || !std::isfinite(snr_linear))
        throw std::invalid_argument("snr_to_sigma2: SNR must be positive");
    if (!(sigma_h2 > 0.0) || !std::isfinite(sigma_h2))
        throw std::invalid_argument("snr_to_sigma2: sigma_h2 must be positive");
    return 2.0 * sigma_h2 * spec.power() / snr_linear;
}

} // namespace phasekey
