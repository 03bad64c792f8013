#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "btfp/extract.hpp"

namespace btfp {

/// How the two medians are combined.
///  paper_literal: cfo = (max - min)/2, scaling_factor = (max - cfo)/2
///  symmetric:     cfo = (max + min)/2, scaling_factor = (max - min)/2
/// For a two-level FSK trace at carrier offset c and deviation d the literal
/// form yields (d, c/2) and the symmetric form (c, d).
enum class Variant { paper_literal, symmetric };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);

struct Fingerprint {
    double cfo_hz = 0.0;
    double scaling_factor = 0.0;
    Variant variant = Variant::paper_literal;
    int channel_index = 0;
    std::size_t start_sample = 0;
    std::optional<std::string> label;
};

struct MedianPair {
    double positive;  // median of samples > 0
    double negative;  // median of samples < 0
};

// Minimum number of payload frequency samples for a fingerprint.
inline constexpr std::size_t kMinPayloadSamples = 50;

/// Medians of the positive and negative halves of a frequency trace. Zeros
/// belong to neither half. Throws DegenerateBurstError if either half is empty
/// or the trace is shorter than kMinPayloadSamples.
MedianPair sign_split_medians(std::span<const double> trace);

/// Combines the medians per `variant`.
Fingerprint combine(const MedianPair& m, Variant variant);

/// Fingerprint of an instantaneous-frequency trace (Hz).
Fingerprint fingerprint_trace(std::span<const double> trace, Variant variant);

/// Range of burst.samples that excludes the guards and one filter length of
/// settling at each end. Empty when nothing is left.
struct PayloadRange {
    std::size_t begin = 0;
    std::size_t end = 0;
};
PayloadRange payload_range(const Burst& burst);

/// Demodulates the burst payload and fingerprints it.
Fingerprint extract_fingerprint(const Burst& burst, Variant variant);

struct FingerprintRun {
    std::vector<Fingerprint> rows;
    std::size_t skipped = 0;  // degenerate bursts
};

FingerprintRun fingerprint_capture(std::span<const Burst> bursts, Variant variant,
                                   const std::optional<std::string>& label = std::nullopt);

} // namespace btfp
