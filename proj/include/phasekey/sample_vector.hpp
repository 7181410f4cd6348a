#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace phasekey {

/// Finite real-valued discrete-time observation with its sampling rate and
/// the absolute time of the first sample.
struct SampleVector {
    std::vector<double> samples;
    double sample_rate_hz = 1.0;
    double start_time_s = 0.0;

    SampleVector() = default;

    SampleVector(std::vector<double> s, double rate_hz, double t0)
        : samples(std::move(s)), sample_rate_hz(rate_hz), start_time_s(t0) {
        validate();
    }

    std::size_t size() const { return samples.size(); }

    double sample_period_s() const { return 1.0 / sample_rate_hz; }

    void validate() const {
        if (samples.empty()) throw std::invalid_argument("SampleVector: empty observation");
        if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz))
            throw std::invalid_argument("SampleVector: sample rate must be positive and finite");
        if (!std::isfinite(start_time_s))
            throw std::invalid_argument("SampleVector: start time must be finite");
        for (double v : samples) {
            if (!std::isfinite(v))
                throw std::invalid_argument("SampleVector: non-finite sample");
        }
    }
};

} // namespace phasekey
