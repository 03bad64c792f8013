#include "btfp/fingerprint.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "btfp/dsp.hpp"
#include "btfp/error.hpp"

namespace btfp {

namespace {

// Median of an even-length set is the mean of the two middle values.
double median_in_place(std::vector<double>& v) {
    const std::size_t n = v.size();
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(v.begin(), mid, v.end());
    const double upper = *mid;
    if (n % 2 == 1) return upper;
    const double lower = *std::max_element(v.begin(), mid);
    return 0.5 * (lower + upper);
}

} // namespace

std::string to_string(Variant v) { return v == Variant::paper_literal ? "paper_literal" : "symmetric"; }

Variant variant_from_string(const std::string& s) {
    if (s == "paper_literal") return Variant::paper_literal;
    if (s == "symmetric") return Variant::symmetric;
    throw ParameterError("unknown fingerprint variant '" + s + "' (expected paper_literal or symmetric)");
}

MedianPair sign_split_medians(std::span<const double> trace) {
    if (trace.size() < kMinPayloadSamples)
        throw DegenerateBurstError("payload has " + std::to_string(trace.size()) +
                                   " frequency samples, need at least " + std::to_string(kMinPayloadSamples));
    std::vector<double> pos, neg;
    pos.reserve(trace.size());
    neg.reserve(trace.size());
    for (double v : trace) {
        if (v > 0.0)
            pos.push_back(v);
        else if (v < 0.0)
            neg.push_back(v);
    }
    if (pos.empty() || neg.empty())
        throw DegenerateBurstError("frequency trace has samples of only one sign");
    return {median_in_place(pos), median_in_place(neg)};
}

Fingerprint combine(const MedianPair& m, Variant variant) {
    Fingerprint fp;
    fp.variant = variant;
    const double max = m.positive, min = m.negative;
    if (variant == Variant::paper_literal) {
        fp.cfo_hz = (max - min) / 2.0;
        fp.scaling_factor = (max - fp.cfo_hz) / 2.0;
    } else {
        fp.cfo_hz = (max + min) / 2.0;
        fp.scaling_factor = (max - min) / 2.0;
    }
    return fp;
}

Fingerprint fingerprint_trace(std::span<const double> trace, Variant variant) {
    return combine(sign_split_medians(trace), variant);
}

PayloadRange payload_range(const Burst& burst) {
    const std::size_t n = burst.samples.size();
    const std::size_t head = burst.lead_samples + burst.filter_taps;
    const std::size_t tail = burst.trail_samples + burst.filter_taps;
    if (head + tail >= n) return {0, 0};
    return {head, n - tail};
}

Fingerprint extract_fingerprint(const Burst& burst, Variant variant) {
    const auto range = payload_range(burst);
    if (range.end - range.begin < kMinPayloadSamples + 1)
        throw DegenerateBurstError("burst at sample " + std::to_string(burst.start_sample) +
                                   " leaves too few payload samples after guards and filter settling");
    const auto payload = dsp::slice(burst.samples, range.begin, range.end);
    const auto trace = dsp::quadrature_demod(payload);
    auto fp = fingerprint_trace(trace.values, variant);
    fp.channel_index = burst.channel_index;
    fp.start_sample = burst.start_sample;
    return fp;
}

FingerprintRun fingerprint_capture(std::span<const Burst> bursts, Variant variant,
                                   const std::optional<std::string>& label) {
    FingerprintRun run;
    for (const auto& burst : bursts) {
        try {
            auto fp = extract_fingerprint(burst, variant);
            fp.label = label;
            run.rows.push_back(std::move(fp));
        } catch (const DegenerateBurstError&) {
            ++run.skipped;
        }
    }
    if (run.skipped > 0)
        std::cerr << "warning: skipped " << run.skipped << " degenerate burst(s)\n";
    return run;
}

} // namespace btfp
