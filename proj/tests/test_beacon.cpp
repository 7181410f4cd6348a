#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "phasekey/beacon.hpp"
#include "phasekey/numeric.hpp"

using namespace phasekey;

namespace {
ChannelRealization unit_channel(double phase) {
    return ChannelRealization::from_components(std::cos(phase), std::sin(phase));
}
} // namespace

TEST_CASE("noiseless tone is the sampled cosine") {
    const BeaconSpec spec(2.0, 0.9e6, 64.0 / 2.7e6, 2.7e6, 0.0);
    Rng rng(1);
    const auto obs = received_tone(spec, unit_channel(0.0), 0.0, rng);
    REQUIRE(obs.size() == 64);
    for (std::size_t m = 0; m < obs.size(); ++m) {
        const double expected = 2.0 * std::cos(kTwoPi * 0.9e6 * static_cast<double>(m) / 2.7e6);
        REQUIRE(obs.samples[m] == Catch::Approx(expected).margin(1e-12));
    }
}

TEST_CASE("phase offset of pi negates the waveform") {
    const BeaconSpec spec(1.0, 0.9e6, 64.0 / 2.7e6, 2.7e6, 0.0);
    Rng rng(2);
    const auto base = received_tone(spec, unit_channel(0.0), 0.0, rng);
    const auto flipped = received_tone(spec, unit_channel(kPi), 0.0, rng);
    for (std::size_t m = 0; m < base.size(); ++m)
        REQUIRE(flipped.samples[m] == Catch::Approx(-base.samples[m]).margin(1e-12));
}

TEST_CASE("noiseless tone is periodic when fs is an integer multiple of fc") {
    const BeaconSpec spec(1.0, 0.9e6, 300.0 / 2.7e6, 2.7e6, 0.0);
    Rng rng(3);
    const auto obs = received_tone(spec, unit_channel(1.0), 0.0, rng);
    const std::size_t period = 3; // fs / fc
    for (std::size_t m = 0; m + period < obs.size(); ++m)
        REQUIRE(obs.samples[m] == Catch::Approx(obs.samples[m + period]).margin(1e-9));
}

TEST_CASE("amplitude scales linearly") {
    const BeaconSpec base(1.0, 0.9e6, 64.0 / 2.7e6, 2.7e6, 0.0);
    BeaconSpec scaled = base;
    scaled.amplitude_a = 3.0;
    Rng rng(4);
    const auto a = received_tone(base, unit_channel(0.7), 0.0, rng);
    const auto b = received_tone(scaled, unit_channel(0.7), 0.0, rng);
    for (std::size_t m = 0; m < a.size(); ++m)
        REQUIRE(b.samples[m] == Catch::Approx(3.0 * a.samples[m]).margin(1e-12));
}

TEST_CASE("snr_to_sigma2 realizes the requested SNR") {
    const BeaconSpec spec(std::sqrt(2.0), 0.9e6, 64.0 / 2.7e6, 2.7e6, 0.0); // P = 1
    REQUIRE(snr_to_sigma2(spec, 0.5, 1.0) == Catch::Approx(1.0));
    REQUIRE(snr_to_sigma2(spec, 0.5, db_to_linear(25.0)) ==
            Catch::Approx(std::pow(10.0, -2.5)).epsilon(1e-12));
    REQUIRE(snr_to_sigma2(spec, 0.5, 1e12) < 1e-11);
    REQUIRE_THROWS_AS(snr_to_sigma2(spec, 0.5, 0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(snr_to_sigma2(spec, 0.5, -3.0), std::invalid_argument);
}

TEST_CASE("measured SNR matches the configured value") {
    // a = 1, per-realization signal power a^2 alpha^2 / 2 against sigma^2,
    // averaged over channel draws, should land on the configured SNR.
    const double snr_db = 25.0;
    const double snr = db_to_linear(snr_db);
    const double sigma_h2 = 0.5;
    const BeaconSpec spec(1.0, 0.9e6, 256.0 / 2.7e6, 2.7e6, 0.0);
    const double sigma2 = snr_to_sigma2(spec, sigma_h2, snr);

    const ChannelParams params(sigma_h2, 0.014);
    Rng root(5);
    Rng ch = root.substream("channel");
    double signal_power = 0.0;
    const int trials = 10000;
    for (int t = 0; t < trials; ++t) {
        const auto h = sample_channel(ch, params);
        signal_power += 0.5 * h.amplitude * h.amplitude; // a = 1
    }
    signal_power /= trials;
    const double measured_db = linear_to_db(signal_power / sigma2);
    REQUIRE(measured_db == Catch::Approx(snr_db).margin(0.1));
}

TEST_CASE("beacon validation") {
    REQUIRE_THROWS_AS(BeaconSpec(0.0, 1e6, 1e-3, 3e6), std::invalid_argument);
    REQUIRE_THROWS_AS(BeaconSpec(1.0, 1e6, 1e-3, 1.5e6), std::invalid_argument); // sub-Nyquist
    REQUIRE_THROWS_AS(BeaconSpec(1.0, 1e6, 1e-6, 3e6), std::invalid_argument); // < 16 samples
    REQUIRE_THROWS_AS(BeaconSpec(1.0, 1e6, -1.0, 3e6), std::invalid_argument);

    const BeaconSpec ok(1.0, 0.9e6, 20.0 / 2.7e6, 2.7e6);
    REQUIRE(ok.n_samples() == 20);
    REQUIRE(ok.power() == Catch::Approx(0.5));

    Rng rng(6);
    ChannelRealization bad;
    bad.amplitude = std::numeric_limits<double>::quiet_NaN();
    REQUIRE_THROWS_AS(received_tone(ok, bad, 0.0, rng), std::invalid_argument);
    REQUIRE_THROWS_AS(received_tone(ok, unit_channel(0.0), -1.0, rng), std::invalid_argument);
}
