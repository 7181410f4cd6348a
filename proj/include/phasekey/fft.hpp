#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "phasekey/numeric.hpp"

namespace phasekey::detail {

/// In-place iterative radix-2 FFT (decimation in time). Twiddle tables are
/// cached per length in thread-local storage; callers on different threads
/// never share mutable state.
inline void fft_inplace(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    if (!is_power_of_two(n)) throw std::invalid_argument("fft: length must be a power of 2");
    if (n < 2) return;

    // bit-reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }

    thread_local std::unordered_map<std::size_t, std::vector<std::complex<double>>> twiddle_cache;
    auto& tw = twiddle_cache[n];
    if (tw.size() != n / 2) {
        tw.resize(n / 2);
        for (std::size_t k = 0; k < n / 2; ++k) {
            const double ang = -kTwoPi * static_cast<double>(k) / static_cast<double>(n);
            tw[k] = {std::cos(ang), std::sin(ang)};
        }
    }

    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t stride = n / len;
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> w = tw[k * stride];
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
            }
        }
    }
}

inline void ifft_inplace(std::vector<std::complex<double>>& a) {
    for (auto& v : a) v = std::conj(v);
    fft_inplace(a);
    const double scale = 1.0 / static_cast<double>(a.size());
    for (auto& v : a) v = std::conj(v) * scale;
}

/// Exact n-point DFT for arbitrary n via the Bluestein chirp-z transform,
/// needed where the transform length is dictated by the data (no zero
/// padding allowed). Returns all n bins.
inline std::vector<std::complex<double>> dft_arbitrary(const std::vector<double>& x) {
    const std::size_t n = x.size();
    if (n == 0) throw std::invalid_argument("dft_arbitrary: empty input");
    const std::size_t conv_len = next_power_of_two(2 * n - 1);

    // chirp angles evaluated mod 2n to keep large m^2 accurate
    const auto chirp = [n](std::size_t m) {
        const double r = std::fmod(static_cast<double>(m) * static_cast<double>(m),
                                   2.0 * static_cast<double>(n));
        const double ang = kPi * r / static_cast<double>(n);
        return std::complex<double>(std::cos(ang), std::sin(ang));
    };

    std::vector<std::complex<double>> a(conv_len, {0.0, 0.0});
    std::vector<std::complex<double>> b(conv_len, {0.0, 0.0});
    for (std::size_t m = 0; m < n; ++m) {
        a[m] = x[m] * std::conj(chirp(m));
        b[m] = chirp(m);
        if (m > 0) b[conv_len - m] = chirp(m);
    }
    fft_inplace(a);
    fft_inplace(b);
    for (std::size_t i = 0; i < conv_len; ++i) a[i] *= b[i];
    ifft_inplace(a);

    std::vector<std::complex<double>> out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = std::conj(chirp(k)) * a[k];
    return out;
}

/// DFT of a real sequence zero-padded to n_fft, returned for bins
/// 0..n_fft/2 inclusive. Uses the even/odd packing trick: one complex FFT
/// of half length covers the whole real spectrum.
inline std::vector<std::complex<double>> real_dft_halfspectrum(const std::vector<double>& x,
                                                               std::size_t n_fft) {
    if (!is_power_of_two(n_fft)) throw std::invalid_argument("fft: length must be a power of 2");
    if (n_fft < x.size()) throw std::invalid_argument("fft: n_fft smaller than input");
    const std::size_t half = n_fft / 2;

    std::vector<std::complex<double>> packed(half, {0.0, 0.0});
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (i & 1)
            packed[i / 2].imag(x[i]);
        else
            packed[i / 2].real(x[i]);
    }
    fft_inplace(packed);

    std::vector<std::complex<double>> out(half + 1);
    const std::complex<double> z0 = packed[0];
    out[0] = {z0.real() + z0.imag(), 0.0};
    out[half] = {z0.real() - z0.imag(), 0.0};
    for (std::size_t k = 1; k < half; ++k) {
        const std::complex<double> zk = packed[k];
        const std::complex<double> znk = std::conj(packed[half - k]);
        const std::complex<double> even = 0.5 * (zk + znk);
        const std::complex<double> odd = 0.5 * (zk - znk);
        const double ang = -kTwoPi * static_cast<double>(k) / static_cast<double>(n_fft);
        out[k] = even + std::complex<double>(std::cos(ang), std::sin(ang)) * odd *
                            std::complex<double>(0.0, -1.0);
    }
    return out;
}

} // namespace phasekey::detail
