#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "btfp/dsp.hpp"
#include "btfp/error.hpp"
#include "btfp/merge.hpp"
#include "support.hpp"

using namespace btfp;

namespace {

constexpr double kFs = kHalfBandRateHz;
constexpr double kMid = 2441.5e6;
constexpr std::size_t kNfft = 8192;
constexpr double kBin = 2 * kFs / kNfft;

IqStream silent(double center, std::size_t n = 20000) { return {std::vector<cd>(n, cd(0, 0)), kFs, center}; }

// Tone at an absolute frequency inside one half-band.
IqStream tone_at(double abs_hz, double center, std::size_t n = 20000, double amp = 1.0) {
    return ts::tone(abs_hz - center, kFs, n, amp, center);
}

double merged_peak_abs(const IqStream& merged) {
    const auto bins = dsp::power_spectrum(merged, kNfft);
    return std::max_element(bins.begin(), bins.end(), [](auto& a, auto& b) { return a.power < b.power; })->freq_hz;
}

} // namespace

TEST_CASE("merge puts each half-band's DC at -20 and +20 MHz") {
    const auto lower = tone_at(kLowerCenterHz, kLowerCenterHz);
    const auto upper = tone_at(kUpperCenterHz, kUpperCenterHz);
    const auto m1 = merge_streams(lower, silent(kUpperCenterHz));
    CHECK(m1.sample_rate_hz == 80e6);
    CHECK(m1.center_freq_hz == kMid);
    CHECK(std::abs(merged_peak_abs(m1) - (kMid - 20e6)) <= kBin);
    const auto m2 = merge_streams(silent(kLowerCenterHz), upper);
    CHECK(std::abs(merged_peak_abs(m2) - (kMid + 20e6)) <= kBin);
}

TEST_CASE("a 2435.0 MHz tone in the lower half lands at -6.5 MHz") {
    const auto merged = merge_streams(tone_at(2435.0e6, kLowerCenterHz), silent(kUpperCenterHz));
    CHECK(std::abs(merged_peak_abs(merged) - (kMid - 6.5e6)) <= kBin);
    const std::vector<cd> mid(merged.samples.begin() + 1000, merged.samples.begin() + 1000 + kNfft);
    CHECK(std::abs(ts::dft_peak_hz(mid, 80e6, kNfft) - (-6.5e6)) <= kBin);
}

TEST_CASE("band-limited content keeps its absolute frequency from either half") {
    for (double f : {2403.3e6, 2410.0e6, 2421.5e6, 2427.25e6, 2438.9e6}) {
        const auto m = merge_streams(tone_at(f, kLowerCenterHz), silent(kUpperCenterHz));
        CAPTURE(f);
        CHECK(std::abs(merged_peak_abs(m) - f) <= kBin);
    }
    for (double f : {2444.1e6, 2455.0e6, 2461.5e6, 2470.7e6, 2479.5e6}) {
        const auto m = merge_streams(silent(kLowerCenterHz), tone_at(f, kUpperCenterHz));
        CAPTURE(f);
        CHECK(std::abs(merged_peak_abs(m) - f) <= kBin);
    }
}

TEST_CASE("merging two silent captures gives silence") {
    const auto m = merge_streams(silent(kLowerCenterHz, 500), silent(kUpperCenterHz, 700));
    CHECK(m.size() == 1000);
    for (const auto& x : m.samples) CHECK(x == cd(0, 0));
}

TEST_CASE("merge preserves the total energy of disjoint-band content") {
    const auto lower = tone_at(2414.0e6, kLowerCenterHz, 40000, 0.7);
    const auto upper = tone_at(2466.0e6, kUpperCenterHz, 40000, 1.3);
    const auto m = merge_streams(lower, upper);
    CHECK(energy(m) == doctest::Approx(energy(lower) + energy(upper)).epsilon(0.02));
}

TEST_CASE("offset_samples delays the upper capture") {
    // Impulses at the same input index; the merged distance between them is
    // twice the offset, and the output covers only the overlap.
    auto lower = silent(kLowerCenterHz, 4000);
    auto upper = silent(kUpperCenterHz, 4000);
    lower.samples[1500] = cd(1, 0);
    upper.samples[1500] = cd(1, 0);
    const auto peaks = [](const IqStream& m) {
        // Lower content sits at -20 MHz and upper at +20 MHz; separate them by
        // mixing each to DC and taking the local maximum of a short average.
        std::vector<std::size_t> out;
        for (double shift : {20e6, -20e6}) {
            const auto base = dsp::frequency_shift(m, shift);
            std::size_t best = 0;
            double best_v = -1;
            for (std::size_t i = 2; i + 2 < base.size(); ++i) {
                cd acc = 0;
                for (int j = -2; j <= 2; ++j) acc += base.samples[static_cast<std::size_t>(static_cast<long>(i) + j)];
                if (std::abs(acc) > best_v) {
                    best_v = std::abs(acc);
                    best = i;
                }
            }
            out.push_back(best);
        }
        return out;
    };
    for (std::int64_t off : {0, 100, -100, 7}) {
        const auto m = merge_streams(lower, upper, off);
        const auto p = peaks(m);
        CAPTURE(off);
        CHECK(static_cast<std::int64_t>(p[1]) - static_cast<std::int64_t>(p[0]) == 2 * off);
        CHECK(m.size() == 2 * (4000 - static_cast<std::size_t>(std::abs(off))));
    }
}

TEST_CASE("merge rejects mismatched geometry") {
    const auto lower = silent(kLowerCenterHz);
    auto other_rate = silent(kUpperCenterHz);
    other_rate.sample_rate_hz = 20e6;
    CHECK_THROWS_AS(merge_streams(lower, other_rate), ParameterError);
    CHECK_THROWS_AS(merge_streams(lower, silent(kUpperCenterHz + 1e6)), ParameterError);
    CHECK_THROWS_AS(merge_streams(lower, silent(kUpperCenterHz, 100), 200), ParameterError);
    CHECK_THROWS_AS(merge_streams(silent(kLowerCenterHz, 100), silent(kUpperCenterHz), -200), ParameterError);
}
