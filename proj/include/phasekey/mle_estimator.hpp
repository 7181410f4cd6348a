#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "phasekey/fft.hpp"
#include "phasekey/numeric.hpp"
#include "phasekey/sample_vector.hpp"

namespace phasekey {

/// Degenerate observation (no spectral peak, vanishing correlation sums).
struct EstimationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PhaseEstimate {
    double omega_hat = 0.0;   // rad/s
    double theta_hat = 0.0;   // rad, in [0, 2*pi)
    std::size_t n_samples = 0;
    bool converged = true;
};

/// Phase-variance lower bounds for a sampled tone in white noise, as a
/// function of the per-sample SNR a_r^2 / (2 sigma^2).
struct CrbReport {
    double var_theta_lower_bound = 0.0; // exact finite-N bound
    double var_theta_large_n = 0.0;     // 4 / (SNR * N_s)
    double snr_linear = 0.0;
    std::size_t n_samples = 0;
};

struct RoughSearchResult {
    std::size_t k_hat = 0;
    double omega_low = 0.0; // rad/s
};

struct FineSearchResult {
    double omega_hat = 0.0;
    bool converged = false;
    int iterations = 0;
};

/// Default zero-padded transform length: smallest power of two >= 4*N_s,
/// so the rough peak lands well inside the fine-search bracket.
inline std::size_t default_dft_length(std::size_t n_samples) {
    return next_power_of_two(4 * n_samples);
}

/// Step 1: zero-padded DFT peak over bins strictly inside (0, f_s/2); DC
/// and Nyquist are excluded from the search. Constant observations (the
/// all-zero and DC-only degenerate inputs) carry no tone and are rejected
/// up front; a noise-only window still yields a usable peak.
inline RoughSearchResult rough_frequency_search(const SampleVector& obs, std::size_t dft_len) {
    if (!is_power_of_two(dft_len) || dft_len <= obs.size())
        throw std::invalid_argument(
            "rough_frequency_search: dft_len must be a power of 2 greater than the observation");

    const auto [mn, mx] = std::minmax_element(obs.samples.begin(), obs.samples.end());
    if (*mn == *mx)
        throw EstimationError("rough_frequency_search: constant observation carries no tone");

    const auto spectrum = detail::real_dft_halfspectrum(obs.samples, dft_len);
    const std::size_t half = dft_len / 2;

    std::size_t best_k = 0;
    double best_mag = 0.0;
    for (std::size_t k = 1; k < half; ++k) {
        const double mag = std::abs(spectrum[k]);
        if (mag > best_mag) {
            best_mag = mag;
            best_k = k;
        }
    }
    if (best_k == 0 || best_mag == 0.0)
        throw EstimationError("rough_frequency_search: no spectral peak in (0, fs/2)");

    const double ts = obs.sample_period_s();
    RoughSearchResult r;
    r.k_hat = best_k;
    r.omega_low = kTwoPi * static_cast<double>(best_k) / (static_cast<double>(dft_len) * ts);
    return r;
}

namespace detail {

/// Correlation and Gram sums of the window against cos(w m Ts) and
/// sin(w m Ts), plus their m-weighted companions for the frequency
/// derivative. Together they carry the concentrated likelihood of the
/// real-tone model
///   L(w) = [Sc Ss] G(w)^-1 [Sc Ss]^T,  G = [[P, V], [V, Q]].
/// Unlike max |R(w)|, this statistic is unbiased by the negative-frequency
/// image, so a noiseless tone is recovered exactly at any window length.
struct ToneMoments {
    double sc = 0, ss = 0;     // sum r cos, sum r sin
    double mc = 0, ms = 0;     // sum m r cos, sum m r sin
    double c2 = 0, s2 = 0;     // sum cos(2wt), sum sin(2wt)
    double m2c = 0, m2s = 0;   // m-weighted second harmonic
    double n = 0;

    double p() const { return 0.5 * (n + c2); }   // sum cos^2
    double q() const { return 0.5 * (n - c2); }   // sum sin^2
    double v() const { return 0.5 * s2; }         // sum cos sin
};

inline ToneMoments tone_moments(const SampleVector& obs, double omega) {
    const double ts = obs.sample_period_s();
    const std::complex<double> step{std::cos(omega * ts), std::sin(omega * ts)};
    const std::complex<double> step2 = step * step;
    std::complex<double> rot{1.0, 0.0};
    std::complex<double> rot2{1.0, 0.0};
    ToneMoments t;
    t.n = static_cast<double>(obs.size());
    for (std::size_t m = 0; m < obs.size(); ++m) {
        const double x = obs.samples[m];
        const double md = static_cast<double>(m);
        t.sc += x * rot.real();
        t.ss += x * rot.imag();
        t.mc += md * x * rot.real();
        t.ms += md * x * rot.imag();
        t.c2 += rot2.real();
        t.s2 += rot2.imag();
        t.m2c += md * rot2.real();
        t.m2s += md * rot2.imag();
        rot *= step;
        rot2 *= step2;
    }
    return t;
}

/// Sign-carrying derivative of the concentrated likelihood,
/// num' den - num den', with L = num / den.
inline double likelihood_slope(const ToneMoments& t, double ts) {
    const double p = t.p(), q = t.q(), v = t.v();
    const double dsc = -ts * t.ms;
    const double dss = ts * t.mc;
    const double dp = -ts * t.m2s;
    const double dq = ts * t.m2s;
    const double dv = ts * t.m2c;

    const double num = t.sc * t.sc * q - 2.0 * t.sc * t.ss * v + t.ss * t.ss * p;
    const double den = p * q - v * v;
    const double dnum = 2.0 * t.sc * dsc * q + t.sc * t.sc * dq -
                        2.0 * (dsc * t.ss + t.sc * dss) * v - 2.0 * t.sc * t.ss * dv +
                        2.0 * t.ss * dss * p + t.ss * t.ss * dp;
    const double dden = dp * q + p * dq - 2.0 * v * dv;
    return dnum * den - num * dden;
}

} // namespace detail

/// Step 2: secant refinement of the frequency inside the one-bin bracket
/// around the rough peak. Iterates on the derivative of the concentrated
/// likelihood with bracket projection. The converged flag reports reaching
/// 1e-4 of a resolution bin; iteration continues toward machine accuracy
/// while steps keep shrinking, so noiseless tones resolve exactly.
inline FineSearchResult fine_frequency_search(const SampleVector& obs, std::size_t k_hat,
                                              std::size_t dft_len) {
    if (!is_power_of_two(dft_len) || dft_len <= obs.size())
        throw std::invalid_argument(
            "fine_frequency_search: dft_len must be a power of 2 greater than the observation");
    if (k_hat == 0 || k_hat >= dft_len / 2)
        throw std::invalid_argument("fine_frequency_search: k_hat outside (0, fs/2)");

    const double ts = obs.sample_period_s();
    const double bin = kTwoPi / (static_cast<double>(dft_len) * ts);
    double lo = (static_cast<double>(k_hat) - 1.0) * bin;
    double hi = (static_cast<double>(k_hat) + 1.0) * bin;
    const double window_bin = kTwoPi / (static_cast<double>(obs.size()) * ts);
    const double tol_converged = 1e-4 * window_bin;
    const double tol_stop = 1e-11 * window_bin;
    constexpr int kMaxIterations = 50;

    const auto slope = [&obs, ts](double w) {
        return detail::likelihood_slope(detail::tone_moments(obs, w), ts);
    };

    double w0 = lo, w1 = hi;
    double g0 = slope(w0);
    double g1 = slope(w1);

    FineSearchResult result;
    result.omega_hat = 0.5 * (lo + hi);
    for (int it = 0; it < kMaxIterations; ++it) {
        double w2;
        if (g1 != g0) {
            w2 = w1 - g1 * (w1 - w0) / (g1 - g0);
        } else {
            w2 = 0.5 * (lo + hi);
        }
        if (!(w2 > lo) || !(w2 < hi)) w2 = 0.5 * (lo + hi); // project into bracket
        const double g2 = slope(w2);

        // narrow the bracket around the sign change of the slope
        if (g2 > 0.0)
            lo = w2;
        else
            hi = w2;

        const double delta = std::fabs(w2 - w1);
        w0 = w1;
        g0 = g1;
        w1 = w2;
        g1 = g2;
        result.omega_hat = w2;
        result.iterations = it + 1;
        if (delta < tol_converged) result.converged = true;
        if (delta < tol_stop || g2 == 0.0) break;
    }
    return result;
}

/// Step 3: maximum-likelihood phase at the estimated frequency. The model
/// r[m] ~ A cos(w m Ts) + B sin(w m Ts) is solved exactly (A = b cos theta,
/// B = -b sin theta) and the phase is the four-quadrant arctangent
/// atan2(-B, A); with an orthogonal Gram matrix this reduces to
/// atan2(-sum r sin(w t), sum r cos(w t)). The result is reduced into
/// [0, 2*pi). `omega_clock_ref` carries the estimate back to the common
/// time origin; passing the nominal carrier keeps slot-to-slot estimates in
/// one frame without amplifying the frequency-estimation error by the
/// absolute start time.
inline double estimate_phase(const SampleVector& obs, double omega_hat,
                             double omega_clock_ref) {
    if (!(omega_hat > 0.0) || !std::isfinite(omega_hat))
        throw std::invalid_argument("estimate_phase: omega_hat must be positive");

    const auto t = detail::tone_moments(obs, omega_hat);
    const double p = t.p(), q = t.q(), v = t.v();
    const double a = t.sc * q - t.ss * v; // proportional to b cos(theta)
    const double b = t.ss * p - t.sc * v; // proportional to -b sin(theta)
    if (a == 0.0 && b == 0.0)
        throw EstimationError("estimate_phase: correlation sums vanished");

    const double theta_window = std::atan2(-b, a);
    return wrap_to_2pi(theta_window - omega_clock_ref * obs.start_time_s);
}

inline double estimate_phase(const SampleVector& obs, double omega_hat) {
    return estimate_phase(obs, omega_hat, omega_hat);
}

/// Full three-step pipeline: rough DFT search, secant refinement, phase.
/// `omega_clock_ref` <= 0 means "reference with the estimated frequency".
inline PhaseEstimate estimate_tone(const SampleVector& obs, std::size_t dft_len = 0,
                                   double omega_clock_ref = 0.0) {
    if (dft_len == 0) dft_len = default_dft_length(obs.size());
    const RoughSearchResult rough = rough_frequency_search(obs, dft_len);
    const FineSearchResult fine = fine_frequency_search(obs, rough.k_hat, dft_len);
    const double ref = omega_clock_ref > 0.0 ? omega_clock_ref : fine.omega_hat;

    PhaseEstimate est;
    est.omega_hat = fine.omega_hat;
    est.theta_hat = estimate_phase(obs, fine.omega_hat, ref);
    est.n_samples = obs.size();
    est.converged = fine.converged;
    return est;
}

/// Cramer-Rao lower bound on the phase-estimate variance when frequency and
/// phase are estimated jointly. Exact finite-N coefficient
/// 2(2N-1)/(N(N+1)) / SNR, with large-N limit 4/(SNR N).
inline CrbReport crb_phase_variance(double snr_linear, std::size_t n_samples) {
    if (!(snr_linear > 0.0) || !std::isfinite(snr_linear))
        throw std::invalid_argument("crb_phase_variance: SNR must be positive");
    if (n_samples < 16)
        throw std::invalid_argument("crb_phase_variance: need at least 16 samples");
    const double n = static_cast<double>(n_samples);
    CrbReport report;
    report.var_theta_lower_bound = 2.0 * (2.0 * n - 1.0) / (n * (n + 1.0)) / snr_linear;
    report.var_theta_large_n = 4.0 / (snr_linear * n);
    report.snr_linear = snr_linear;
    report.n_samples = n_samples;
    return report;
}

} // namespace phasekey
