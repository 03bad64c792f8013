#pragma once

// Burst detection and dehopping on the merged wideband stream.

#include <cstddef>
#include <string>
#include <vector>

#include "btfp/iq.hpp"

namespace btfp {

enum class PlanStandard { classic, ble };

struct ChannelPlan {
    PlanStandard standard = PlanStandard::classic;
    std::vector<double> channel_centers_hz;

    static ChannelPlan classic();  // 79 x 1 MHz from 2402 MHz
    static ChannelPlan ble();      // 40 x 2 MHz from 2402 MHz
    static ChannelPlan from_name(const std::string& name);

    double spacing_hz() const { return standard == PlanStandard::classic ? 1e6 : 2e6; }
    std::size_t size() const { return channel_centers_hz.size(); }
    std::string name() const { return standard == PlanStandard::classic ? "classic" : "ble"; }
};

/// Energy detector settings. Thresholds are in dB above the estimated floor of
/// the smoothed wideband power. The defaults detect 1 MHz-channel bursts whose
/// in-channel SNR is 15 dB or more in an 80 MHz stream, where such a burst
/// raises the wideband power by only 1.5-2.6 dB.
struct DetectorConfig {
    double threshold_db = 1.0;
    double hysteresis_db = 0.5;
    double min_burst_us = 60.0;
    double max_burst_us = 3000.0;
    double guard_us = 10.0;
    std::size_t window_samples = 1024;
    double floor_percentile = 20.0;
    double lowpass_cutoff_hz = 600e3;
    double lowpass_transition_hz = 200e3;
    // Interval dropped when more than this share of its above-noise spectral
    // energy lies further than 1 MHz from the assigned channel centre.
    double max_out_of_channel_fraction = 0.30;

    void validate() const;
};

struct Interval {
    std::size_t start = 0;  // first sample
    std::size_t end = 0;    // one past the last sample

    std::size_t length() const { return end - start; }
    bool operator==(const Interval&) const = default;
};

/// One detected packet, dehopped to baseband and low-pass filtered.
struct Burst {
    IqStream samples;               // centre 0; covers [start - lead, end + trail)
    int channel_index = 0;
    std::size_t start_sample = 0;   // detected interval in the merged stream
    std::size_t end_sample = 0;
    double coarse_freq_hz = 0.0;    // absolute
    double mean_power = 0.0;        // over the detected interval
    std::size_t lead_samples = 0;   // guard actually kept before start_sample
    std::size_t trail_samples = 0;  // guard actually kept after end_sample
    bool guard_clamped = false;     // guard cut short by a stream edge
    std::size_t filter_taps = 0;    // length of the low-pass applied
};

double estimate_noise_floor(const IqStream& stream, const DetectorConfig& config);

std::vector<Interval> detect_bursts(const IqStream& stream, const DetectorConfig& config);

/// Same as above with a caller-supplied floor (linear power).
std::vector<Interval> detect_bursts(const IqStream& stream, const DetectorConfig& config,
                                    double noise_floor);

/// Power centroid over the +-1 MHz neighbourhood of the strongest spectral
/// peak in the interval, after removing the median (noise) level.
double coarse_center_frequency(const IqStream& stream, const Interval& interval);

/// Index of the nearest channel centre; an exact midpoint goes to the lower
/// index. Throws ParameterError outside the plan span +- half a spacing.
int nearest_channel(double freq_hz, const ChannelPlan& plan);

Burst dehop_burst(const IqStream& stream, const Interval& interval, int channel_index,
                  const ChannelPlan& plan, const DetectorConfig& config);

/// Share of above-noise spectral energy further than 1 MHz from `channel_hz`.
double out_of_channel_fraction(const IqStream& stream, const Interval& interval, double channel_hz);

struct ExtractStats {
    std::size_t intervals = 0;
    std::size_t rejected_collisions = 0;
    std::size_t rejected_out_of_plan = 0;
};

std::vector<Burst> extract_packets(const IqStream& stream, const ChannelPlan& plan,
                                   const DetectorConfig& config, ExtractStats* stats = nullptr);

} // namespace btfp
