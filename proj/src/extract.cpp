#include "btfp/extract.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "btfp/dsp.hpp"
#include "btfp/error.hpp"
#include "btfp/kernels.hpp"

namespace btfp {

namespace {

constexpr std::size_t kMinSpectrumSamples = 256;
constexpr std::size_t kMaxSpectrumFft = 4096;
constexpr double kNeighbourhoodHz = 1e6;

struct IntervalSpectrum {
    std::vector<dsp::SpectrumBin> bins;
    double noise = 0.0;  // per-bin noise level (median bin power)
};

IntervalSpectrum interval_spectrum(const IqStream& stream, const Interval& interval) {
    if (interval.end > stream.size() || interval.start >= interval.end)
        throw ParameterError("interval outside the stream");
    if (interval.length() < kMinSpectrumSamples)
        throw ParameterError("interval of " + std::to_string(interval.length()) +
                             " samples is too short for a spectral estimate (need 256)");
    const std::size_t nfft = std::min(kMaxSpectrumFft, std::bit_floor(interval.length()));
    IntervalSpectrum out;
    out.bins = dsp::power_spectrum(dsp::slice(stream, interval.start, interval.end), nfft);
    std::vector<double> p(out.bins.size());
    std::transform(out.bins.begin(), out.bins.end(), p.begin(), [](const auto& b) { return b.power; });
    auto mid = p.begin() + static_cast<std::ptrdiff_t>(p.size() / 2);
    std::nth_element(p.begin(), mid, p.end());
    out.noise = *mid;
    return out;
}

double centroid(const IntervalSpectrum& spec) {
    const auto peak = std::max_element(spec.bins.begin(), spec.bins.end(),
                                       [](const auto& a, const auto& b) { return a.power < b.power; });
    double num = 0.0, den = 0.0;
    for (const auto& b : spec.bins) {
        if (std::abs(b.freq_hz - peak->freq_hz) > kNeighbourhoodHz) continue;
        const double excess = b.power - spec.noise;
        num += excess * b.freq_hz;
        den += excess;
    }
    return den > 0.0 ? num / den : peak->freq_hz;
}

double out_of_channel(const IntervalSpectrum& spec, double channel_hz) {
    double outside = 0.0, total = 0.0;
    for (const auto& b : spec.bins) {
        const double excess = b.power - spec.noise;
        total += excess;
        if (std::abs(b.freq_hz - channel_hz) > kNeighbourhoodHz) outside += excess;
    }
    if (!(total > 0.0)) return 1.0;
    return std::clamp(outside / total, 0.0, 1.0);
}

std::size_t us_to_samples(double us, double rate) {
    return static_cast<std::size_t>(std::llround(us * 1e-6 * rate));
}

} // namespace

ChannelPlan ChannelPlan::classic() {
    ChannelPlan plan{PlanStandard::classic, {}};
    for (int k = 0; k < 79; ++k) plan.channel_centers_hz.push_back(2402e6 + 1e6 * k);
    return plan;
}

ChannelPlan ChannelPlan::ble() {
    ChannelPlan plan{PlanStandard::ble, {}};
    for (int k = 0; k < 40; ++k) plan.channel_centers_hz.push_back(2402e6 + 2e6 * k);
    return plan;
}

ChannelPlan ChannelPlan::from_name(const std::string& name) {
    if (name == "classic") return classic();
    if (name == "ble") return ble();
    throw ParameterError("unknown channel plan '" + name + "' (expected classic or ble)");
}

void DetectorConfig::validate() const {
    if (!(hysteresis_db > 0.0) || !(threshold_db > hysteresis_db))
        throw ParameterError("detector needs threshold_db > hysteresis_db > 0");
    if (!(min_burst_us < max_burst_us) || min_burst_us < 0.0)
        throw ParameterError("detector needs 0 <= min_burst_us < max_burst_us");
    if (guard_us < 0.0) throw ParameterError("guard_us must be non-negative");
    if (window_samples == 0) throw ParameterError("window_samples must be positive");
    if (!(floor_percentile > 0.0 && floor_percentile < 100.0))
        throw ParameterError("floor_percentile must lie in (0, 100)");
    if (!(max_out_of_channel_fraction > 0.0 && max_out_of_channel_fraction <= 1.0))
        throw ParameterError("max_out_of_channel_fraction must lie in (0, 1]");
}

double estimate_noise_floor(const IqStream& stream, const DetectorConfig& config) {
    config.validate();
    const std::size_t w = config.window_samples;
    if (stream.size() < 10 * w)
        throw ParameterError("noise floor needs at least " + std::to_string(10 * w) + " samples, got " +
                             std::to_string(stream.size()));
    std::vector<double> power(stream.size());
    kernels::active().power(stream.samples, power);

    const std::size_t blocks = stream.size() / w;
    std::vector<double> means(blocks);
    for (std::size_t b = 0; b < blocks; ++b) {
        double acc = 0.0;
        for (std::size_t i = b * w; i < (b + 1) * w; ++i) acc += power[i];
        means[b] = acc / static_cast<double>(w);
    }
    const double peak = *std::max_element(means.begin(), means.end());
    const auto rank = static_cast<std::size_t>(config.floor_percentile / 100.0 * static_cast<double>(blocks - 1));
    std::nth_element(means.begin(), means.begin() + static_cast<std::ptrdiff_t>(rank), means.end());
    // A noiseless capture has a zero floor; fall back to 60 dB below the peak.
    return std::max(means[rank], 1e-6 * peak);
}

std::vector<Interval> detect_bursts(const IqStream& stream, const DetectorConfig& config) {
    return detect_bursts(stream, config, estimate_noise_floor(stream, config));
}

std::vector<Interval> detect_bursts(const IqStream& stream, const DetectorConfig& config,
                                    double noise_floor) {
    config.validate();
    const std::size_t n = stream.size();
    const std::size_t w = config.window_samples;
    std::vector<double> power(n);
    kernels::active().power(stream.samples, power);

    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + power[i];

    // Threshold comparisons on window sums avoid a division per sample.
    const double wd = static_cast<double>(w);
    const double enter = noise_floor * std::pow(10.0, config.threshold_db / 10.0) * wd;
    const double leave = noise_floor * std::pow(10.0, (config.threshold_db - config.hysteresis_db) / 10.0) * wd;
    const std::size_t min_len = us_to_samples(config.min_burst_us, stream.sample_rate_hz);
    const std::size_t max_len = us_to_samples(config.max_burst_us, stream.sample_rate_hz);
    const std::size_t back = w / 2, ahead = w - w / 2;

    std::vector<Interval> out;
    auto close = [&](std::size_t start, std::size_t end) {
        const std::size_t len = end - start;
        if (len >= min_len && len <= max_len) out.push_back({start, end});
    };

    bool inside = false;
    std::size_t start = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i >= back ? i - back : 0;
        const std::size_t hi = std::min(n, i + ahead);
        const double sum = prefix[hi] - prefix[lo];
        if (!inside) {
            if (sum > enter) {
                inside = true;
                start = i;
            }
        } else if (sum < leave) {
            inside = false;
            close(start, i);
        }
    }
    if (inside) close(start, n);
    return out;
}

double coarse_center_frequency(const IqStream& stream, const Interval& interval) {
    return centroid(interval_spectrum(stream, interval));
}

int nearest_channel(double freq_hz, const ChannelPlan& plan) {
    const auto& c = plan.channel_centers_hz;
    if (c.empty()) throw ParameterError("empty channel plan");
    const double half = plan.spacing_hz() / 2.0;
    if (!(freq_hz >= c.front() - half && freq_hz <= c.back() + half))
        throw ParameterError("frequency " + std::to_string(freq_hz) + " Hz is outside the " + plan.name() +
                             " channel plan");
    int best = 0;
    double best_dist = std::abs(freq_hz - c[0]);
    for (std::size_t k = 1; k < c.size(); ++k) {
        const double d = std::abs(freq_hz - c[k]);
        if (d < best_dist) {
            best_dist = d;
            best = static_cast<int>(k);
        }
    }
    return best;
}

double out_of_channel_fraction(const IqStream& stream, const Interval& interval, double channel_hz) {
    return out_of_channel(interval_spectrum(stream, interval), channel_hz);
}

Burst dehop_burst(const IqStream& stream, const Interval& interval, int channel_index,
                  const ChannelPlan& plan, const DetectorConfig& config) {
    if (channel_index < 0 || static_cast<std::size_t>(channel_index) >= plan.size())
        throw ParameterError("channel index " + std::to_string(channel_index) + " invalid for the " +
                             plan.name() + " plan");
    if (interval.start >= interval.end || interval.end > stream.size())
        throw ParameterError("interval outside the stream");

    const std::size_t guard = us_to_samples(config.guard_us, stream.sample_rate_hz);
    Burst burst;
    burst.channel_index = channel_index;
    burst.start_sample = interval.start;
    burst.end_sample = interval.end;
    burst.lead_samples = std::min(guard, interval.start);
    burst.trail_samples = std::min(guard, stream.size() - interval.end);
    burst.guard_clamped = burst.lead_samples < guard || burst.trail_samples < guard;

    double acc = 0.0;
    for (std::size_t i = interval.start; i < interval.end; ++i) acc += std::norm(stream.samples[i]);
    burst.mean_power = acc / static_cast<double>(interval.length());

    const double channel_hz = plan.channel_centers_hz[static_cast<std::size_t>(channel_index)];
    auto piece = dsp::slice(stream, interval.start - burst.lead_samples, interval.end + burst.trail_samples);
    piece = dsp::frequency_shift(std::move(piece), -(channel_hz - stream.center_freq_hz));
    const auto design =
        dsp::design_lowpass(config.lowpass_cutoff_hz, config.lowpass_transition_hz, stream.sample_rate_hz);
    burst.samples = dsp::fir_lowpass(piece, design);
    burst.samples.center_freq_hz = 0.0;
    burst.filter_taps = design.length();
    burst.coarse_freq_hz = channel_hz;
    return burst;
}

std::vector<Burst> extract_packets(const IqStream& stream, const ChannelPlan& plan,
                                   const DetectorConfig& config, ExtractStats* stats) {
    config.validate();
    std::vector<Burst> bursts;
    ExtractStats local;
    if (stream.size() < 10 * config.window_samples) {
        if (stats) *stats = local;
        return bursts;
    }
    const auto intervals = detect_bursts(stream, config);
    local.intervals = intervals.size();
    for (const auto& iv : intervals) {
        if (iv.length() < kMinSpectrumSamples) continue;
        const auto spec = interval_spectrum(stream, iv);
        const double coarse = centroid(spec);
        int channel;
        try {
            channel = nearest_channel(coarse, plan);
        } catch (const ParameterError&) {
            ++local.rejected_out_of_plan;
            continue;
        }
        const double channel_hz = plan.channel_centers_hz[static_cast<std::size_t>(channel)];
        if (out_of_channel(spec, channel_hz) > config.max_out_of_channel_fraction) {
            ++local.rejected_collisions;
            continue;
        }
        auto burst = dehop_burst(stream, iv, channel, plan, config);
        burst.coarse_freq_hz = coarse;
        bursts.push_back(std::move(burst));
    }
    if (stats) *stats = local;
    return bursts;
}

} // namespace btfp
