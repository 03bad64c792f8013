#include "btfp/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "btfp/dsp.hpp"
#include "btfp/error.hpp"
#include "btfp/kernels.hpp"

namespace btfp::synth {

namespace {

constexpr double kPi = std::numbers::pi;

std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

// Random-stream tags so that independent draws never share a substream.
enum Stream : std::uint64_t { kOrder = 1, kBurst = 2, kNoise = 3 };

// Frequency pulse of one symbol: rectangular NRZ of width T convolved with a
// Gaussian of bandwidth-time product BT, evaluated at `tau` symbols from the
// symbol centre.
double frequency_pulse(double tau) {
    const double sigma = std::sqrt(std::log(2.0)) / (2.0 * kPi * kGaussianBt);
    const double s = std::sqrt(2.0) * sigma;
    return 0.5 * (std::erf((tau + 0.5) / s) - std::erf((tau - 0.5) / s));
}

constexpr int kPulseSpan = 4;  // symbols either side beyond which the pulse is < 1e-30

} // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    std::uint64_t x = seed ^ (0xa0761d6478bd642fULL * (stream + 1)) ^ (0xe7037ed1a0b428dbULL * (index + 1));
    for (auto& s : state_) s = splitmix64(x);
}

std::uint64_t Rng::next() {
    // xoshiro256**
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

std::uint64_t Rng::below(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0}) % n;
    std::uint64_t x;
    do {
        x = next();
    } while (x >= limit);
    return x % n;
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1;
    do {
        u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * kPi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * kPi * u2);
}

void DeviceProfile::validate(double channel_spacing_hz) const {
    if (!(deviation_hz > 0.0)) throw ParameterError("profile '" + label + "': deviation must be positive");
    if (!(amplitude > 0.0)) throw ParameterError("profile '" + label + "': amplitude must be positive");
    if (!(symbol_rate_hz > 0.0)) throw ParameterError("profile '" + label + "': symbol rate must be positive");
    if (cfo_jitter_hz < 0.0) throw ParameterError("profile '" + label + "': CFO jitter must be non-negative");
    if (!(std::abs(cfo_mean_hz) + 3.0 * cfo_jitter_hz < channel_spacing_hz / 2.0))
        throw ParameterError("profile '" + label + "': |cfo_mean| + 3 jitter must stay inside the channel");
    if (label.find_first_of(",\"\n\r") != std::string::npos)
        throw ParameterError("profile label '" + label + "' contains a comma, quote or newline");
}

void CaptureScenario::validate() const {
    if (profiles.empty()) throw ParameterError("scenario has no device profiles");
    if (packets_per_device < 1) throw ParameterError("packets_per_device must be at least 1");
    if (payload_bits < 1) throw ParameterError("payload_bits must be at least 1");
    if (!(inter_burst_gap_us.first >= 0.0 && inter_burst_gap_us.first <= inter_burst_gap_us.second))
        throw ParameterError("inter_burst_gap_us must satisfy 0 <= min <= max");
    if (std::isnan(snr_db)) throw ParameterError("snr_db is NaN");
    for (const auto& p : profiles) p.validate(plan.spacing_hz());
}

BurstLayout burst_layout(std::size_t payload_bits, double symbol_rate_hz, double sample_rate_hz) {
    const double sps = sample_rate_hz / symbol_rate_hz;
    BurstLayout l;
    l.payload_begin = static_cast<std::size_t>(std::llround(kRampSymbols * sps));
    l.payload_end = static_cast<std::size_t>(std::llround((kRampSymbols + static_cast<double>(payload_bits)) * sps));
    l.total = static_cast<std::size_t>(std::llround((2 * kRampSymbols + static_cast<double>(payload_bits)) * sps));
    return l;
}

IqStream gfsk_burst(const DeviceProfile& profile, const std::vector<std::uint8_t>& payload,
                    double sample_rate_hz) {
    if (!(profile.symbol_rate_hz > 0.0) || !(sample_rate_hz >= 8.0 * profile.symbol_rate_hz))
        throw ParameterError("GFSK needs a sample rate of at least 8x the symbol rate");
    if (payload.empty()) throw ParameterError("GFSK payload is empty");

    const double sps = sample_rate_hz / profile.symbol_rate_hz;
    const auto layout = burst_layout(payload.size(), profile.symbol_rate_hz, sample_rate_hz);
    const std::size_t n = layout.total;
    const auto nsym = static_cast<std::ptrdiff_t>(payload.size());

    // Normalised frequency trace in [-1, 1].
    std::vector<double> shape(n, 0.0);
    const bool integral = std::abs(sps - std::round(sps)) < 1e-9;
    if (integral) {
        const auto isps = static_cast<std::ptrdiff_t>(std::llround(sps));
        // pulse[m] for sample offset m from the start of a symbol, m in [-span*sps, (span+1)*sps)
        const std::ptrdiff_t lo = -kPulseSpan * isps, hi = (kPulseSpan + 1) * isps;
        std::vector<double> pulse(static_cast<std::size_t>(hi - lo));
        for (std::ptrdiff_t m = lo; m < hi; ++m)
            pulse[static_cast<std::size_t>(m - lo)] = frequency_pulse((static_cast<double>(m) + 0.5) / sps - 0.5);
        for (std::ptrdiff_t k = 0; k < nsym; ++k) {
            const double b = payload[static_cast<std::size_t>(k)] ? 1.0 : -1.0;
            const std::ptrdiff_t sym_start = (kRampSymbols + k) * isps;
            for (std::ptrdiff_t m = lo; m < hi; ++m) {
                const std::ptrdiff_t idx = sym_start + m;
                if (idx < 0 || idx >= static_cast<std::ptrdiff_t>(n)) continue;
                shape[static_cast<std::size_t>(idx)] += b * pulse[static_cast<std::size_t>(m - lo)];
            }
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            const double t = (static_cast<double>(i) + 0.5) / sps - kRampSymbols;  // symbols into payload
            const auto k0 = static_cast<std::ptrdiff_t>(std::floor(t)) - kPulseSpan;
            double acc = 0.0;
            for (std::ptrdiff_t k = std::max<std::ptrdiff_t>(0, k0); k < std::min(nsym, k0 + 2 * kPulseSpan + 1); ++k)
                acc += (payload[static_cast<std::size_t>(k)] ? 1.0 : -1.0) *
                       frequency_pulse(t - static_cast<double>(k) - 0.5);
            shape[i] = acc;
        }
    }

    IqStream out;
    out.sample_rate_hz = sample_rate_hz;
    out.center_freq_hz = 0.0;
    out.samples.resize(n);
    const double ramp_len = kRampSymbols * sps;
    double phase = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) + 0.5;
        double env = 1.0;
        if (t < ramp_len)
            env = 0.5 * (1.0 - std::cos(kPi * t / ramp_len));
        else if (static_cast<double>(n) - t < ramp_len)
            env = 0.5 * (1.0 - std::cos(kPi * (static_cast<double>(n) - t) / ramp_len));
        out.samples[i] = std::polar(profile.amplitude * env, phase);
        const double f = profile.cfo_mean_hz + profile.deviation_hz * shape[i];
        phase = std::remainder(phase + 2.0 * kPi * f / sample_rate_hz, 2.0 * kPi);
    }
    return out;
}

IqStream derive_half_band(const IqStream& merged, double shift_hz) {
    const auto shifted = dsp::frequency_shift(merged, shift_hz);
    const auto taps = dsp::windowed_sinc(kHalfBandTaps, merged.sample_rate_hz / 4.0, merged.sample_rate_hz,
                                         dsp::Window::kaiser, kHalfBandKaiserBeta);
    const std::size_t half = taps.size() / 2;
    std::vector<cd> padded(shifted.size() + 2 * half + 1);
    std::copy(shifted.samples.begin(), shifted.samples.end(), padded.begin() + static_cast<std::ptrdiff_t>(half));

    IqStream out;
    out.sample_rate_hz = merged.sample_rate_hz / 2.0;
    out.center_freq_hz = merged.center_freq_hz - shift_hz;
    out.samples.resize(shifted.size() / 2);
    kernels::active().fir(padded, taps, out.samples, 2);
    return out;
}

Capture generate_capture(const CaptureScenario& scenario, bool derive_half_bands) {
    scenario.validate();
    const double fs = kMergedRateHz;
    const std::size_t total_bursts = scenario.profiles.size() * static_cast<std::size_t>(scenario.packets_per_device);

    std::vector<std::size_t> order;
    for (std::size_t p = 0; p < scenario.profiles.size(); ++p)
        order.insert(order.end(), static_cast<std::size_t>(scenario.packets_per_device), p);
    Rng order_rng(scenario.seed, kOrder, 0);
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[order_rng.below(i)]);

    struct Planned {
        DeviceProfile profile;
        int channel;
        std::size_t start;
        std::vector<std::uint8_t> bits;
    };
    std::vector<Planned> planned;
    planned.reserve(total_bursts);
    const auto gap_samples = [&](Rng& rng) {
        return static_cast<std::size_t>(
            std::llround(rng.uniform(scenario.inter_burst_gap_us.first, scenario.inter_burst_gap_us.second) * 1e-6 * fs));
    };

    std::size_t cursor = 0;
    for (std::size_t i = 0; i < total_bursts; ++i) {
        Rng rng(scenario.seed, kBurst, i);
        Planned b;
        b.profile = scenario.profiles[order[i]];
        b.channel = static_cast<int>(rng.below(scenario.plan.size()));
        b.start = cursor + gap_samples(rng);
        b.profile.cfo_mean_hz += b.profile.cfo_jitter_hz * rng.normal();
        b.bits.resize(static_cast<std::size_t>(scenario.payload_bits));
        for (auto& bit : b.bits) bit = static_cast<std::uint8_t>(rng.next() >> 63);

        const double offset = scenario.plan.channel_centers_hz[static_cast<std::size_t>(b.channel)] - kMergedCenterHz;
        // Peak instantaneous frequency must stay inside the capture band.
        const double reach = std::abs(offset) + std::abs(b.profile.cfo_mean_hz) + b.profile.deviation_hz;
        if (reach >= fs / 2.0) throw ParameterError("band overflow: burst frequency exceeds the capture band");

        cursor = b.start + burst_layout(b.bits.size(), b.profile.symbol_rate_hz, fs).total;
        if (cursor > scenario.max_capture_samples)
            throw ParameterError("band overflow: scenario needs more than " +
                                 std::to_string(scenario.max_capture_samples) + " samples");
        planned.push_back(std::move(b));
    }
    const std::size_t length = cursor + static_cast<std::size_t>(std::llround(scenario.inter_burst_gap_us.second * 1e-6 * fs));

    Capture cap;
    cap.merged.sample_rate_hz = fs;
    cap.merged.center_freq_hz = kMergedCenterHz;
    cap.merged.samples.assign(length, cd(0.0, 0.0));

    if (std::isfinite(scenario.snr_db)) {
        const double noise_power = (fs / scenario.plan.spacing_hz()) / std::pow(10.0, scenario.snr_db / 10.0);
        const double sd = std::sqrt(noise_power / 2.0);
        Rng noise(scenario.seed, kNoise, 0);
        for (auto& s : cap.merged.samples) {
            const double re = noise.normal();
            const double im = noise.normal();
            s = cd(sd * re, sd * im);
        }
    }

    const auto& kern = kernels::active();
    for (const auto& b : planned) {
        auto burst = gfsk_burst(b.profile, b.bits, fs);
        const double offset = scenario.plan.channel_centers_hz[static_cast<std::size_t>(b.channel)] - kMergedCenterHz;
        const double step = offset / fs;
        const double phase0 = std::fmod(step * static_cast<double>(b.start), 1.0);
        kern.rotate(burst.samples, burst.samples, phase0, step);
        for (std::size_t n = 0; n < burst.size(); ++n) cap.merged.samples[b.start + n] += burst.samples[n];

        TruthRow row;
        row.label = b.profile.label;
        row.channel_index = b.channel;
        row.start_sample = b.start;
        row.end_sample = b.start + burst.size();
        row.true_cfo_hz = b.profile.cfo_mean_hz;
        row.true_deviation_hz = b.profile.deviation_hz;
        row.true_amplitude = b.profile.amplitude;
        cap.truth.push_back(std::move(row));
    }

    if (derive_half_bands) {
        cap.lower = derive_half_band(cap.merged, fs / 4.0);
        cap.upper = derive_half_band(cap.merged, -fs / 4.0);
    }
    return cap;
}

std::vector<DeviceProfile> paper_like_profiles() {
    return {
        {"watch", -90e3, 3e3, 155e3, 1.0, 1e6},
        {"presenter", -45e3, 3e3, 168e3, 1.2, 1e6},
        {"mouse", 5e3, 3e3, 160e3, 1.1, 1e6},
        {"earbuds_a", 7e3, 3e3, 161e3, 1.05, 1e6},
        {"earbuds_b", 50e3, 3e3, 150e3, 1.3, 1e6},
        {"earbuds_c", 95e3, 3e3, 172e3, 1.0, 1e6},
    };
}

CaptureScenario scenario_from_json(const nlohmann::json& j) {
    CaptureScenario s;
    try {
        if (j.contains("profiles")) {
            const auto& p = j.at("profiles");
            if (p.is_string()) {
                if (p.get<std::string>() != "paper_like")
                    throw ParameterError("unknown profile set '" + p.get<std::string>() + "'");
                s.profiles = paper_like_profiles();
            } else {
                for (const auto& e : p) {
                    DeviceProfile d;
                    d.label = e.at("label").get<std::string>();
                    d.cfo_mean_hz = e.value("cfo_mean_hz", 0.0);
                    d.cfo_jitter_hz = e.value("cfo_jitter_hz", 0.0);
                    d.deviation_hz = e.value("deviation_hz", 160e3);
                    d.amplitude = e.value("amplitude", 1.0);
                    d.symbol_rate_hz = e.value("symbol_rate_hz", 1e6);
                    s.profiles.push_back(d);
                }
            }
        } else {
            s.profiles = paper_like_profiles();
        }
        s.packets_per_device = j.value("packets_per_device", s.packets_per_device);
        if (j.contains("snr_db")) {
            const auto& v = j.at("snr_db");
            s.snr_db = v.is_null() ? std::numeric_limits<double>::infinity() : v.get<double>();
        }
        if (j.contains("plan")) s.plan = ChannelPlan::from_name(j.at("plan").get<std::string>());
        s.payload_bits = j.value("payload_bits", s.payload_bits);
        s.seed = j.value("seed", s.seed);
        if (j.contains("inter_burst_gap_us")) {
            const auto& g = j.at("inter_burst_gap_us");
            s.inter_burst_gap_us = {g.at(0).get<double>(), g.at(1).get<double>()};
        }
        s.max_capture_samples = j.value("max_capture_samples", s.max_capture_samples);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("bad scenario JSON: ") + e.what());
    }
    s.validate();
    return s;
}

nlohmann::json scenario_to_json(const CaptureScenario& s) {
    nlohmann::ordered_json j;
    auto profiles = nlohmann::ordered_json::array();
    for (const auto& p : s.profiles) {
        nlohmann::ordered_json e;
        e["label"] = p.label;
        e["cfo_mean_hz"] = p.cfo_mean_hz;
        e["cfo_jitter_hz"] = p.cfo_jitter_hz;
        e["deviation_hz"] = p.deviation_hz;
        e["amplitude"] = p.amplitude;
        e["symbol_rate_hz"] = p.symbol_rate_hz;
        profiles.push_back(e);
    }
    j["profiles"] = profiles;
    j["packets_per_device"] = s.packets_per_device;
    if (std::isfinite(s.snr_db))
        j["snr_db"] = s.snr_db;
    else
        j["snr_db"] = nullptr;
    j["plan"] = s.plan.name();
    j["payload_bits"] = s.payload_bits;
    j["seed"] = s.seed;
    j["inter_burst_gap_us"] = {s.inter_burst_gap_us.first, s.inter_burst_gap_us.second};
    j["max_capture_samples"] = s.max_capture_samples;
    return j;
}

} // namespace btfp::synth
