#pragma once

// Synthetic Bluetooth-like GFSK captures with known per-device impairments.
// Used as ground truth for the extractor, fingerprint and classifier.

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "btfp/extract.hpp"
#include "btfp/iq.hpp"

namespace btfp::synth {

inline constexpr double kMergedRateHz = 80e6;
inline constexpr double kMergedCenterHz = 2441.5e6;
inline constexpr double kGaussianBt = 0.5;
inline constexpr int kRampSymbols = 4;
// Anti-alias filter for deriving the half-band pair.
inline constexpr std::size_t kHalfBandTaps = 511;
inline constexpr double kHalfBandKaiserBeta = 7.0;

struct DeviceProfile {
    std::string label;
    double cfo_mean_hz = 0.0;
    double cfo_jitter_hz = 0.0;  // per-packet CFO = mean + jitter * N(0, 1)
    double deviation_hz = 160e3;
    double amplitude = 1.0;
    double symbol_rate_hz = 1e6;

    // Throws ParameterError unless deviation > 0, amplitude > 0 and
    // |cfo_mean| + 3 jitter stays inside half of `channel_spacing_hz`.
    void validate(double channel_spacing_hz) const;
};

struct CaptureScenario {
    std::vector<DeviceProfile> profiles;
    int packets_per_device = 1;
    // In-channel SNR of a unit-amplitude burst; +inf for a noiseless capture.
    double snr_db = 20.0;
    ChannelPlan plan = ChannelPlan::classic();
    int payload_bits = 400;
    std::uint64_t seed = 1;
    std::pair<double, double> inter_burst_gap_us{100.0, 400.0};
    std::size_t max_capture_samples = 160'000'000;

    void validate() const;
};

struct TruthRow {
    std::string label;
    int channel_index = 0;
    std::size_t start_sample = 0;
    std::size_t end_sample = 0;
    double true_cfo_hz = 0.0;
    double true_deviation_hz = 0.0;
    double true_amplitude = 0.0;
};

using GroundTruth = std::vector<TruthRow>;

struct Capture {
    IqStream merged;  // 80 MHz around 2441.5 MHz
    IqStream lower;   // 40 MHz around 2421.5 MHz
    IqStream upper;   // 40 MHz around 2461.5 MHz
    GroundTruth truth;
};

/// Sample range of the payload inside a burst from gfsk_burst.
struct BurstLayout {
    std::size_t payload_begin = 0;
    std::size_t payload_end = 0;
    std::size_t total = 0;
};

BurstLayout burst_layout(std::size_t payload_bits, double symbol_rate_hz, double sample_rate_hz);

/// Phase-continuous GFSK (Gaussian BT 0.5) at carrier offset profile.cfo_mean_hz,
/// deviation +-profile.deviation_hz, with a 4-symbol raised-cosine amplitude
/// ramp of unmodulated carrier before and after the payload. Bit 1 maps to
/// +deviation. Throws ParameterError if sample_rate_hz < 8 symbol rates.
IqStream gfsk_burst(const DeviceProfile& profile, const std::vector<std::uint8_t>& payload,
                    double sample_rate_hz);

Capture generate_capture(const CaptureScenario& scenario, bool derive_half_bands = true);

/// Recovers one half-band recorder's view: shift by `shift_hz`, low-pass to a
/// quarter of the rate, decimate by two.
IqStream derive_half_band(const IqStream& merged, double shift_hz);

/// Six profiles: four well separated in (CFO, deviation), plus "mouse" and
/// "earbuds_a" which overlap.
std::vector<DeviceProfile> paper_like_profiles();

// JSON schema mirrors CaptureScenario; "profiles" may be the string "paper_like".
CaptureScenario scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const CaptureScenario& s);

// Deterministic per-(seed, stream, index) random source.
class Rng {
public:
    Rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);
    std::uint64_t next();
    double uniform();                       // [0, 1)
    double uniform(double lo, double hi);   // [lo, hi)
    std::uint64_t below(std::uint64_t n);   // [0, n)
    double normal();

private:
    std::uint64_t state_[4];
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace btfp::synth
