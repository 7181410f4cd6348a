#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "phasekey/fading_channel.hpp"
#include "support/statistics.hpp"

using namespace phasekey;

TEST_CASE("envelope power matches 2 sigma_h2") {
    const ChannelParams params(0.5, 0.014);
    Rng rng(1);
    const std::size_t n = 1000000;
    double sum_a2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto c = sample_channel(rng, params);
        sum_a2 += c.amplitude * c.amplitude;
    }
    REQUIRE(sum_a2 / static_cast<double>(n) == Catch::Approx(1.0).margin(0.01));
}

TEST_CASE("phase is uniform on [0, 2pi)") {
    const ChannelParams params(0.5, 0.014);
    Rng rng(2);
    std::vector<double> phases(100000);
    for (auto& p : phases) p = sample_channel(rng, params).phase;
    for (double p : phases) {
        REQUIRE(p >= 0.0);
        REQUIRE(p < kTwoPi);
    }
    const double d = testsupport::ks_statistic(phases, [](double v) { return v / kTwoPi; });
    REQUIRE(d < testsupport::ks_critical_1pct(phases.size()));
}

TEST_CASE("amplitude and phase are consistent with the quadratures") {
    const ChannelParams params(2.0, 0.014);
    Rng rng(3);
    for (int i = 0; i < 1000; ++i) {
        const auto c = sample_channel(rng, params);
        const double a2 = c.in_phase * c.in_phase + c.quadrature * c.quadrature;
        REQUIRE(c.amplitude * c.amplitude == Catch::Approx(a2).epsilon(1e-12));
        REQUIRE(wrap_to_2pi(std::atan2(c.quadrature, c.in_phase)) == c.phase);
    }
}

TEST_CASE("fixed seed reproduces the realization") {
    const ChannelParams params(0.5, 0.014);
    Rng r1(99), r2(99);
    const auto a = sample_channel(r1, params);
    const auto b = sample_channel(r2, params);
    REQUIRE(a.in_phase == b.in_phase);
    REQUIRE(a.quadrature == b.quadrature);
    REQUIRE(a.phase == b.phase);
}

TEST_CASE("reciprocal pair is bit-identical in both directions") {
    const ChannelParams params(0.5, 0.014);
    Rng rng(4);
    const auto h = sample_channel(rng, params);
    const auto [fwd, bwd] = reciprocal_pair(h);
    REQUIRE(fwd.phase == bwd.phase);
    REQUIRE(fwd.amplitude == bwd.amplitude);
    REQUIRE(fwd.in_phase == h.in_phase);
    REQUIRE(bwd.quadrature == h.quadrature);
}

TEST_CASE("distinct coherence intervals decorrelate") {
    const ChannelParams params(0.5, 0.014);
    Rng rng(5);
    const std::size_t n = 100000;
    std::vector<double> c1(n), c2(n);
    for (std::size_t i = 0; i < n; ++i) {
        c1[i] = std::cos(sample_channel(rng, params).phase);
        c2[i] = std::cos(sample_channel(rng, params).phase);
    }
    REQUIRE(std::fabs(testsupport::sample_correlation(c1, c2)) < 0.01);
}

TEST_CASE("eavesdropper channel is independent with the same marginal") {
    const ChannelParams params(0.5, 0.014);
    Rng root(6);
    Rng legit = root.substream("channel");
    Rng eve = root.substream("eve-channel");

    const std::size_t n = 100000;
    std::vector<double> lp(n), ep(n), la(n), ea(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto l = sample_channel(legit, params);
        const auto e = eavesdropper_channel(eve, params);
        lp[i] = std::cos(l.phase);
        ep[i] = std::cos(e.phase);
        la[i] = l.amplitude;
        ea[i] = e.amplitude;
    }
    REQUIRE(std::fabs(testsupport::sample_correlation(lp, ep)) < 0.01);
    // same marginal distribution: two-sample KS on the envelopes
    REQUIRE(testsupport::ks_two_sample(la, ea) <
            testsupport::ks_two_sample_critical_1pct(n, n));

    Rng eve_again = root.substream("eve-channel");
    const auto e1 = eavesdropper_channel(eve_again, params);
    Rng eve_third = root.substream("eve-channel");
    REQUIRE(eavesdropper_channel(eve_third, params).phase == e1.phase);
}

TEST_CASE("awgn statistics and edge cases") {
    Rng rng(7);
    const auto zero = awgn(100, 0.0, rng);
    for (double v : zero.samples) REQUIRE(v == 0.0);

    Rng r1(8), r2(8);
    const auto a = awgn(1000, 2.0, r1);
    const auto b = awgn(1000, 2.0, r2);
    REQUIRE(a.samples == b.samples);

    Rng r3(9);
    const auto big = awgn(1000000, 1.0, r3);
    double sum2 = 0.0;
    for (double v : big.samples) sum2 += v * v;
    REQUIRE(sum2 / 1e6 == Catch::Approx(1.0).margin(0.01));

    REQUIRE_THROWS_AS(awgn(0, 1.0, r3), std::invalid_argument);
    REQUIRE_THROWS_AS(awgn(10, -1.0, r3), std::invalid_argument);
}

TEST_CASE("parameter validation") {
    REQUIRE_THROWS_AS(ChannelParams(0.0, 1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(ChannelParams(1.0, 0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(NoiseParams(-0.5), std::invalid_argument);
    REQUIRE_NOTHROW(NoiseParams(0.0));
}
