#pragma once

// Independent reference computations for the tests. Nothing here calls into
// the library's DSP code.

#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "btfp/iq.hpp"

namespace ts {

using btfp::cd;
using btfp::IqStream;

inline constexpr double kPi = 3.14159265358979323846;

// Phase computed from the exact integer product, so it does not accumulate error.
inline IqStream tone(double freq_hz, double fs, std::size_t n, double amp = 1.0, double center = 0.0) {
    IqStream s;
    s.sample_rate_hz = fs;
    s.center_freq_hz = center;
    s.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const long double cyc = static_cast<long double>(freq_hz) * static_cast<long double>(i) / fs;
        const long double frac = cyc - std::floor(cyc);
        s.samples[i] = std::polar(amp, static_cast<double>(2.0L * static_cast<long double>(kPi) * frac));
    }
    return s;
}

inline void add_noise(IqStream& s, double variance, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, std::sqrt(variance / 2.0));
    for (auto& x : s.samples) x += cd(nd(rng), nd(rng));
}

// Power of a unit-normalised Blackman-Harris windowed DFT at one frequency:
// a tone of amplitude a at freq_hz reads a^2. Sidelobes are below -92 dB.
inline double tone_power(const std::vector<cd>& x, double fs, double freq_hz) {
    const std::size_t n = x.size();
    std::complex<long double> acc = 0;
    long double wsum = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const long double t = 2.0L * kPi * static_cast<long double>(i) / static_cast<long double>(n - 1);
        const long double w = 0.35875L - 0.48829L * std::cos(t) + 0.14128L * std::cos(2 * t) - 0.01168L * std::cos(3 * t);
        long double cyc = static_cast<long double>(freq_hz) * static_cast<long double>(i) / fs;
        cyc -= std::floor(cyc);
        const long double ph = -2.0L * kPi * cyc;
        acc += w * std::complex<long double>(x[i].real(), x[i].imag()) *
               std::complex<long double>(std::cos(ph), std::sin(ph));
        wsum += w;
    }
    return static_cast<double>(std::norm(acc / wsum));
}

// Baseband frequency of the strongest bin of a Hann-windowed DFT of the first
// nfft samples, evaluated directly with a twiddle table.
inline double dft_peak_hz(const std::vector<cd>& x, double fs, std::size_t nfft) {
    std::vector<cd> tw(nfft), xw(nfft);
    for (std::size_t k = 0; k < nfft; ++k) tw[k] = std::polar(1.0, -2.0 * kPi * static_cast<double>(k) / static_cast<double>(nfft));
    for (std::size_t i = 0; i < nfft; ++i)
        xw[i] = x[i] * (0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(nfft)));
    std::size_t best = 0;
    double best_p = -1.0;
    for (std::size_t k = 0; k < nfft; ++k) {
        cd acc = 0;
        std::size_t idx = 0;
        for (std::size_t i = 0; i < nfft; ++i) {
            acc += xw[i] * tw[idx];
            idx += k;
            if (idx >= nfft) idx -= nfft;
        }
        if (std::norm(acc) > best_p) {
            best_p = std::norm(acc);
            best = k;
        }
    }
    const double k = best >= nfft / 2 ? static_cast<double>(best) - static_cast<double>(nfft) : static_cast<double>(best);
    return k * fs / static_cast<double>(nfft);
}

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag) {
        static std::uint64_t counter = 0;
        std::random_device rd;
        path = std::filesystem::temp_directory_path() /
               ("btfp_" + tag + "_" + std::to_string(rd()) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
};

} // namespace ts
