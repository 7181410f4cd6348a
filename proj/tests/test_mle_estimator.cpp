#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "phasekey/beacon.hpp"
#include "phasekey/mle_estimator.hpp"
#include "phasekey/numeric.hpp"

using namespace phasekey;

namespace {

constexpr double kFc = 0.9e6;
constexpr double kFs = 2.7e6;

SampleVector make_tone(double amplitude, double theta, std::size_t n, double t0 = 0.0,
                       double sigma2 = 0.0, Rng* rng = nullptr) {
    const double ts = 1.0 / kFs;
    std::vector<double> x(n);
    for (std::size_t m = 0; m < n; ++m) {
        const double t = t0 + static_cast<double>(m) * ts;
        x[m] = amplitude * std::cos(kTwoPi * kFc * t + theta);
        if (sigma2 > 0.0) x[m] += rng->gaussian(0.0, std::sqrt(sigma2));
    }
    return SampleVector(std::move(x), kFs, t0);
}

} // namespace

TEST_CASE("rough search lands within one bin of the carrier") {
    const auto obs = make_tone(1.0, 0.3, 1024);
    const auto rough = rough_frequency_search(obs, 4096);
    const double bin = kFs / 4096.0;
    const double expected_k = kFc * 4096.0 / kFs; // 1365.33
    REQUIRE(std::fabs(static_cast<double>(rough.k_hat) - expected_k) <= 1.0);
    REQUIRE(std::fabs(rough.omega_low - kTwoPi * kFc) <= kTwoPi * bin);
}

TEST_CASE("degenerate spectra are rejected") {
    SampleVector dc(std::vector<double>(128, 1.0), kFs, 0.0);
    REQUIRE_THROWS_AS(rough_frequency_search(dc, 1024), EstimationError);

    SampleVector zero(std::vector<double>(128, 0.0), kFs, 0.0);
    REQUIRE_THROWS_AS(rough_frequency_search(zero, 1024), EstimationError);

    const auto obs = make_tone(1.0, 0.0, 128);
    REQUIRE_THROWS_AS(rough_frequency_search(obs, 100), std::invalid_argument); // not pow2
    REQUIRE_THROWS_AS(rough_frequency_search(obs, 128), std::invalid_argument); // not > N
}

TEST_CASE("rough search succeeds in nearly all noisy trials") {
    const double snr = db_to_linear(25.0);
    const double sigma2 = 1.0 / (2.0 * snr); // amplitude 1 tone
    const std::size_t n = 1024, dft = 4096;
    Rng rng(21);
    int ok = 0;
    const int trials = 2000;
    for (int t = 0; t < trials; ++t) {
        Rng noise = rng.substream("noise", static_cast<std::uint64_t>(t));
        const auto obs = make_tone(1.0, rng.uniform(0.0, kTwoPi), n, 0.0, sigma2, &noise);
        const auto rough = rough_frequency_search(obs, dft);
        if (std::fabs(rough.omega_low - kTwoPi * kFc) <= kTwoPi * kFs / dft) ++ok;
    }
    REQUIRE(ok >= trials - 2);
}

TEST_CASE("fine search recovers a noiseless frequency to 1e-9 relative") {
    for (double theta : {0.0, 0.7, 2.9, 5.5}) {
        const auto obs = make_tone(1.0, theta, 1024);
        const auto rough = rough_frequency_search(obs, 4096);
        const auto fine = fine_frequency_search(obs, rough.k_hat, 4096);
        REQUIRE(fine.converged);
        REQUIRE(std::fabs(fine.omega_hat - kTwoPi * kFc) / (kTwoPi * kFc) < 1e-9);
    }
}

TEST_CASE("fine search is exact when the tone sits on a transform bin") {
    // fs/4 tone: bin 1024 of a 4096-point transform exactly
    const double fc = kFs / 4.0;
    const double ts = 1.0 / kFs;
    std::vector<double> x(1024);
    for (std::size_t m = 0; m < x.size(); ++m)
        x[m] = std::cos(kTwoPi * fc * static_cast<double>(m) * ts + 0.4);
    SampleVector obs(std::move(x), kFs, 0.0);
    const auto rough = rough_frequency_search(obs, 4096);
    const auto fine = fine_frequency_search(obs, rough.k_hat, 4096);
    REQUIRE(std::fabs(fine.omega_hat - kTwoPi * fc) / (kTwoPi * fc) < 1e-9);
}

TEST_CASE("noisy frequency error variance sits near its lower bound") {
    // oracle: asymptotic joint-estimation bound 12 / (SNR Ts^2 N (N^2 - 1))
    const double snr = db_to_linear(25.0);
    const double sigma2 = 1.0 / (2.0 * snr);
    const std::size_t n = 1024;
    const double ts = 1.0 / kFs;
    const double crb_omega =
        12.0 / (snr * ts * ts * static_cast<double>(n) *
                (static_cast<double>(n) * static_cast<double>(n) - 1.0));

    Rng rng(22);
    double sum2 = 0.0;
    const int trials = 1500;
    for (int t = 0; t < trials; ++t) {
        Rng noise = rng.substream("noise", static_cast<std::uint64_t>(t));
        const auto obs = make_tone(1.0, rng.uniform(0.0, kTwoPi), n, 0.0, sigma2, &noise);
        const auto est = estimate_tone(obs);
        const double err = est.omega_hat - kTwoPi * kFc;
        sum2 += err * err;
    }
    const double var = sum2 / trials;
    REQUIRE(var > 0.9 * crb_omega);
    REQUIRE(var < 2.0 * crb_omega);
}

TEST_CASE("phase formula recovers noiseless phases exactly") {
    for (double theta : {0.0, 1.234, 3.0, 6.2}) {
        const auto obs = make_tone(1.5, theta, 512);
        const double est = estimate_phase(obs, kTwoPi * kFc);
        REQUIRE(std::fabs(wrapped_phase_error(est, theta)) < 1e-9);
    }
}

TEST_CASE("phase estimation rejects degenerate input") {
    SampleVector zero(std::vector<double>(64, 0.0), kFs, 0.0);
    REQUIRE_THROWS_AS(estimate_phase(zero, kTwoPi * kFc), EstimationError);
    const auto obs = make_tone(1.0, 0.0, 64);
    REQUIRE_THROWS_AS(estimate_phase(obs, 0.0), std::invalid_argument);
}

TEST_CASE("full pipeline recovers any noiseless phase to 1e-6") {
    for (int i = 0; i < 24; ++i) {
        const double theta = kTwoPi * static_cast<double>(i) / 24.0;
        for (double alpha : {0.3, 1.0, 2.5}) {
            const auto obs = make_tone(alpha, theta, 256);
            const auto est = estimate_tone(obs);
            REQUIRE(est.converged);
            REQUIRE(std::fabs(wrapped_phase_error(est.theta_hat, theta)) < 1e-6);
        }
    }
}

TEST_CASE("clock-referenced estimates agree across observation windows") {
    // two windows of the same tone, seconds apart on the shared clock
    const double theta = 2.345;
    const auto early = make_tone(1.0, theta, 512, 0.125);
    const auto late = make_tone(1.0, theta, 512, 1.0);
    const double wc = kTwoPi * kFc;
    const auto est_early = estimate_tone(early, 0, wc);
    const auto est_late = estimate_tone(late, 0, wc);
    REQUIRE(std::fabs(wrapped_phase_error(est_early.theta_hat, theta)) < 1e-6);
    REQUIRE(std::fabs(wrapped_phase_error(est_late.theta_hat, theta)) < 1e-6);
    REQUIRE(std::fabs(wrapped_phase_error(est_early.theta_hat, est_late.theta_hat)) < 2e-6);
}

TEST_CASE("phase errors track the CRB at high SNR") {
    const double snr = db_to_linear(25.0);
    const double sigma2 = 1.0 / (2.0 * snr);
    const std::size_t n = 256;
    const double crb = crb_phase_variance(snr, n).var_theta_lower_bound;

    Rng rng(23);
    std::vector<double> errors;
    const int trials = 3000;
    for (int t = 0; t < trials; ++t) {
        const double theta = rng.uniform(0.0, kTwoPi);
        Rng noise = rng.substream("noise", static_cast<std::uint64_t>(t));
        const auto obs = make_tone(1.0, theta, n, 0.0, sigma2, &noise);
        const auto est = estimate_tone(obs);
        errors.push_back(wrapped_phase_error(est.theta_hat, theta));
    }
    const auto mv = mean_and_variance(errors);
    // unbiased within three standard errors of the mean
    REQUIRE(std::fabs(mv.mean) < 3.0 * mv.std_error());
    // variance at or above the bound, within Monte Carlo slack
    const double mc_rel = 3.0 * std::sqrt(2.0 / trials);
    REQUIRE(mv.variance > crb * (1.0 - mc_rel));
    REQUIRE(mv.variance < crb * 1.35);
}

TEST_CASE("crb report values and scalings") {
    const double snr = std::pow(10.0, 2.5);
    const auto report = crb_phase_variance(snr, 20250);
    REQUIRE(report.var_theta_large_n == Catch::Approx(6.24647439046e-7).epsilon(1e-10));
    REQUIRE(report.var_theta_lower_bound == Catch::Approx(6.2460117115e-7).epsilon(1e-10));

    // 1/SNR and 1/N proportionality (large-N form)
    REQUIRE(crb_phase_variance(2.0 * snr, 20250).var_theta_large_n ==
            Catch::Approx(report.var_theta_large_n / 2.0).epsilon(1e-12));
    REQUIRE(crb_phase_variance(snr, 40500).var_theta_large_n ==
            Catch::Approx(report.var_theta_large_n / 2.0).epsilon(1e-12));

    REQUIRE_THROWS_AS(crb_phase_variance(0.0, 1000), std::invalid_argument);
    REQUIRE_THROWS_AS(crb_phase_variance(10.0, 8), std::invalid_argument);
}

TEST_CASE("default transform length covers four times the window") {
    REQUIRE(default_dft_length(1024) == 4096);
    REQUIRE(default_dft_length(1025) == 8192);
    REQUIRE(default_dft_length(20250) == 131072);
}
