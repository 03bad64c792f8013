#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "btfp/dsp.hpp"
#include "btfp/error.hpp"
#include "btfp/synth.hpp"
#include "support.hpp"

using namespace btfp;
using namespace btfp::dsp;

namespace {

double peak_freq(const std::vector<SpectrumBin>& bins) {
    return std::max_element(bins.begin(), bins.end(), [](auto& a, auto& b) { return a.power < b.power; })->freq_hz;
}

std::vector<cd> middle(const IqStream& s, std::size_t margin) {
    return {s.samples.begin() + static_cast<std::ptrdiff_t>(margin), s.samples.end() - static_cast<std::ptrdiff_t>(margin)};
}

} // namespace

TEST_CASE("frequency_shift moves a DC tone to the shift frequency") {
    const double fs = 40e6;
    IqStream dc{std::vector<cd>(8192, cd(1, 0)), fs, 2421.5e6};
    const auto out = frequency_shift(dc, 1e6);
    CHECK(out.size() == dc.size());
    CHECK(out.sample_rate_hz == fs);
    CHECK(out.center_freq_hz == dc.center_freq_hz);
    const double bin = fs / 4096;
    CHECK(std::abs(ts::dft_peak_hz(out.samples, fs, 4096) - 1e6) <= bin);
    CHECK(std::abs(peak_freq(power_spectrum(out, 4096)) - (2421.5e6 + 1e6)) <= bin);
}

TEST_CASE("frequency_shift by zero is the identity") {
    auto s = ts::tone(3.3e6, 40e6, 3000, 0.7);
    ts::add_noise(s, 0.1, 5);
    const auto out = frequency_shift(s, 0.0);
    for (std::size_t i = 0; i < s.size(); ++i) CHECK(std::abs(out.samples[i] - s.samples[i]) <= 1e-12);
}

TEST_CASE("frequency_shift preserves magnitude and composes additively") {
    auto s = ts::tone(-2.1e6, 40e6, 50000, 1.3);
    ts::add_noise(s, 0.2, 6);
    const auto up = frequency_shift(s, 7.25e6);
    const auto back = frequency_shift(up, -7.25e6);
    const auto ab = frequency_shift(frequency_shift(s, 3e6), -11.5e6);
    const auto direct = frequency_shift(s, 3e6 - 11.5e6);
    double mag = 0, inv = 0, comp = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double m = std::abs(s.samples[i]);
        mag = std::max(mag, std::abs(std::abs(up.samples[i]) - m) / m);
        inv = std::max(inv, std::abs(back.samples[i] - s.samples[i]) / m);
        comp = std::max(comp, std::abs(ab.samples[i] - direct.samples[i]) / m);
    }
    CHECK(mag <= 1e-12);
    CHECK(inv <= 1e-6);
    CHECK(comp <= 1e-6);
}

TEST_CASE("frequency_shift rejects shifts outside the representable band") {
    IqStream s{std::vector<cd>(16, cd(1, 0)), 40e6, 0.0};
    CHECK_THROWS_AS(frequency_shift(s, 20e6), ParameterError);
    CHECK_THROWS_AS(frequency_shift(s, -25e6), ParameterError);
    CHECK_NOTHROW(frequency_shift(s, 19.99e6));
}

TEST_CASE("interpolate_x2 doubles length and rate") {
    auto s = ts::tone(1e6, 40e6, 1000);
    const auto out = interpolate_x2(s);
    CHECK(out.size() == 2000);
    CHECK(out.sample_rate_hz == 80e6);
    CHECK_THROWS_AS(interpolate_x2(ts::tone(1e6, 40e6, kInterpolatorTaps - 1)), ParameterError);
}

TEST_CASE("interpolate_x2 keeps a +5 MHz tone and suppresses its image by 60 dB") {
    const auto s = ts::tone(5e6, 40e6, 8192);
    const auto out = interpolate_x2(s);
    const auto mid = middle(out, 200);
    const double wanted = ts::tone_power(mid, 80e6, 5e6);
    const double image = ts::tone_power(mid, 80e6, -35e6);
    CHECK(wanted == doctest::Approx(1.0).epsilon(0.01));
    CHECK(10 * std::log10(wanted / image) >= 60.0);
    const double bin = 80e6 / 8192;
    CHECK(std::abs(ts::dft_peak_hz(mid, 80e6, 8192) - 5e6) <= bin);
}

TEST_CASE("interpolate_x2 passes DC with unity gain") {
    IqStream dc{std::vector<cd>(2000, cd(0.5, -0.25)), 40e6, 0.0};
    const auto out = interpolate_x2(dc);
    for (std::size_t i = 200; i < out.size() - 200; ++i) {
        CHECK(std::abs(out.samples[i] - cd(0.5, -0.25)) <= 0.005 * std::abs(cd(0.5, -0.25)));
    }
}

TEST_CASE("interpolate_x2 preserves in-band energy") {
    auto s = ts::tone(-12e6, 40e6, 40000, 0.8);
    const auto t2 = ts::tone(6.5e6, 40e6, 40000, 1.1);
    const auto t3 = ts::tone(15e6, 40e6, 40000, 0.4);
    for (std::size_t i = 0; i < s.size(); ++i) s.samples[i] += t2.samples[i] + t3.samples[i];
    const auto out = interpolate_x2(s);
    CHECK(energy(out) == doctest::Approx(energy(s)).epsilon(0.01));
}

TEST_CASE("interpolate_x2 lines output sample 2m up with input sample m") {
    const auto s = ts::tone(2e6, 40e6, 4000);
    const auto out = interpolate_x2(s);
    double worst = 0;
    for (std::size_t m = 100; m < 3900; ++m) worst = std::max(worst, std::abs(out.samples[2 * m] - s.samples[m]));
    CHECK(worst < 2e-3);
}

TEST_CASE("design_lowpass sizes taps from the transition width") {
    // ceil(3.3 * 80e6 / 200e3) = 1320, made odd.
    const auto d = design_lowpass(600e3, 200e3, 80e6);
    CHECK(d.length() == 1321);
    CHECK(d.transient_samples() == 660);
    for (std::size_t i = 0; i < d.length(); ++i) CHECK(d.taps[i] == d.taps[d.length() - 1 - i]);
    CHECK(std::accumulate(d.taps.begin(), d.taps.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("windowed_sinc is symmetric with unit DC gain") {
    for (auto w : {Window::hamming, Window::kaiser}) {
        const auto taps = windowed_sinc(101, 5e6, 40e6, w, 6.0);
        REQUIRE(taps.size() == 101);
        for (std::size_t i = 0; i < taps.size(); ++i) CHECK(taps[i] == taps[taps.size() - 1 - i]);
        CHECK(std::accumulate(taps.begin(), taps.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK_THROWS_AS(windowed_sinc(100, 5e6, 40e6, Window::hamming), ParameterError);
}

TEST_CASE("fir_lowpass has unity DC gain and 40 dB stopband at cutoff plus transition") {
    const double fs = 8e6, cut = 600e3, tr = 200e3;
    IqStream dc{std::vector<cd>(4000, cd(1, 0)), fs, 0.0};
    const auto d = design_lowpass(cut, tr, fs);
    const auto out = fir_lowpass(dc, cut, tr);
    CHECK(out.size() == dc.size());
    for (std::size_t i = d.transient_samples(); i < out.size() - d.transient_samples(); ++i)
        CHECK(std::abs(out.samples[i] - cd(1, 0)) <= 0.01);

    for (double f : {cut + tr, -(cut + tr), 1.5e6, -3e6}) {
        const auto t = ts::tone(f, fs, 20000);
        const auto y = fir_lowpass(t, cut, tr);
        const auto mid = middle(y, d.transient_samples());
        CAPTURE(f);
        CHECK(10 * std::log10(ts::tone_power(mid, fs, f)) <= -40.0);
    }
}

TEST_CASE("fir_lowpass is flat up to the cutoff") {
    const double fs = 8e6;
    const auto d = design_lowpass(600e3, 200e3, fs);
    for (double f : {0.0, 300e3, -450e3, 600e3, -600e3}) {
        const auto y = fir_lowpass(ts::tone(f, fs, 20000), d);
        CAPTURE(f);
        CHECK(std::abs(10 * std::log10(ts::tone_power(middle(y, d.transient_samples()), fs, f))) <= 0.1);
    }
}

TEST_CASE("fir_lowpass compensates the group delay") {
    IqStream imp{std::vector<cd>(3001, cd(0, 0)), 8e6, 0.0};
    imp.samples[1500] = cd(1, 0);
    const auto y = fir_lowpass(imp, 600e3, 200e3);
    std::size_t best = 0;
    for (std::size_t i = 0; i < y.size(); ++i)
        if (std::abs(y.samples[i]) > std::abs(y.samples[best])) best = i;
    CHECK(best == 1500);
    for (std::size_t i = 1; i < 200; ++i) CHECK(y.samples[1500 - i] == y.samples[1500 + i]);
}

TEST_CASE("fir_lowpass rejects invalid cutoffs") {
    IqStream s{std::vector<cd>(100, cd(1, 0)), 8e6, 0.0};
    CHECK_THROWS_AS(fir_lowpass(s, 0.0, 200e3), ParameterError);
    CHECK_THROWS_AS(fir_lowpass(s, -1.0, 200e3), ParameterError);
    CHECK_THROWS_AS(fir_lowpass(s, 3.9e6, 200e3), ParameterError);
    CHECK_THROWS_AS(fir_lowpass(s, 600e3, 0.0), ParameterError);
}

TEST_CASE("quadrature_demod reads the frequency of a tone") {
    const auto s = ts::tone(100e3, 8e6, 5000);
    const auto f = quadrature_demod(s);
    CHECK(f.size() == 4999);
    CHECK(f.sample_rate_hz == 8e6);
    for (double v : f.values) CHECK(std::abs(v - 100e3) <= 1.0);
}

TEST_CASE("quadrature_demod negates under conjugation and rejects short input") {
    auto s = ts::tone(-731e3, 8e6, 3000);
    ts::add_noise(s, 0.01, 9);
    auto c = s;
    for (auto& x : c.samples) x = std::conj(x);
    const auto a = quadrature_demod(s), b = quadrature_demod(c);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(b.values[i] == doctest::Approx(-a.values[i]).epsilon(1e-12));
    CHECK_THROWS_AS(quadrature_demod(IqStream{{cd(1, 0)}, 1e6, 0.0}), ParameterError);
}

TEST_CASE("quadrature_demod of a shifted stream is offset by the shift") {
    auto s = ts::tone(250e3, 8e6, 4000);
    for (std::size_t i = 0; i < s.size(); ++i) s.samples[i] *= 1.0 + 0.2 * std::sin(0.01 * static_cast<double>(i));
    const auto base = quadrature_demod(s);
    const auto moved = quadrature_demod(frequency_shift(s, -180e3));
    for (std::size_t i = 0; i < base.size(); ++i) CHECK(std::abs(moved.values[i] - (base.values[i] - 180e3)) <= 1.0);
}

TEST_CASE("quadrature_demod of wideband-filtered GFSK stays inside the deviation band") {
    synth::DeviceProfile p{"dev", 40e3, 0.0, 160e3, 1.0, 1e6};
    std::mt19937_64 rng(12);
    std::vector<std::uint8_t> bits(200);
    for (auto& b : bits) b = static_cast<std::uint8_t>(rng() & 1);
    const double fs = 80e6;
    const auto burst = synth::gfsk_burst(p, bits, fs);
    const auto layout = synth::burst_layout(bits.size(), 1e6, fs);
    const auto d = design_lowpass(2e6, 500e3, fs);
    const auto f = quadrature_demod(fir_lowpass(burst, d));
    double lo = INFINITY, hi = -INFINITY;
    for (std::size_t i = layout.payload_begin + d.length(); i + d.length() < layout.payload_end; ++i) {
        lo = std::min(lo, f.values[i]);
        hi = std::max(hi, f.values[i]);
    }
    CHECK(hi <= 40e3 + 160e3 + 1e3);
    CHECK(lo >= 40e3 - 160e3 - 1e3);
    CHECK(hi > 40e3 + 100e3);
    CHECK(lo < 40e3 - 100e3);
}

TEST_CASE("power_spectrum finds a tone at its absolute frequency") {
    const auto s = ts::tone(-3.2e6, 40e6, 20000, 1.0, 2421.5e6);
    const auto bins = power_spectrum(s, 1024);
    REQUIRE(bins.size() == 1024);
    CHECK(bins.front().freq_hz == doctest::Approx(2421.5e6 - 20e6));
    CHECK(std::abs(peak_freq(bins) - (2421.5e6 - 3.2e6)) <= 40e6 / 1024);
}

TEST_CASE("power_spectrum of white noise is flat and sums to the variance") {
    IqStream s{std::vector<cd>(1 << 18, cd(0, 0)), 1e6, 0.0};
    ts::add_noise(s, 2.0, 21);
    const auto bins = power_spectrum(s, 256);
    double total = 0;
    for (const auto& b : bins) total += b.power;
    CHECK(total == doctest::Approx(2.0).epsilon(0.10));
    const double mean = total / 256;
    for (const auto& b : bins) CHECK(std::abs(b.power - mean) < 0.5 * mean);
}

TEST_CASE("power_spectrum of zeros is zero and input must be long enough") {
    IqStream z{std::vector<cd>(4096, cd(0, 0)), 1e6, 0.0};
    for (const auto& b : power_spectrum(z, 512)) CHECK(b.power == 0.0);
    CHECK_THROWS_AS(power_spectrum(z, 8192), ParameterError);
    CHECK_THROWS_AS(power_spectrum(z, 500), ParameterError);
    CHECK_THROWS_AS(power_spectrum(z, 1), ParameterError);
}
