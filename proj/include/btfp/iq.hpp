#pragma once

#include <complex>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace btfp {

using cd = std::complex<double>;

/// Complex baseband capture. `center_freq_hz` is the absolute RF frequency of
/// baseband DC; zero marks a pure-baseband stream such as a dehopped burst.
struct IqStream {
    std::vector<cd> samples;
    double sample_rate_hz = 1.0;
    double center_freq_hz = 0.0;

    std::size_t size() const { return samples.size(); }
    bool empty() const { return samples.empty(); }
    double duration_s() const { return static_cast<double>(samples.size()) / sample_rate_hz; }
};

/// Real-valued series at a sample rate, e.g. the instantaneous frequency in Hz.
struct RealSeries {
    std::vector<double> values;
    double sample_rate_hz = 1.0;

    std::size_t size() const { return values.size(); }
};

// Throws ParameterError when the rate is not positive or a sample is not finite.
void validate(const IqStream& stream);

/// Reads interleaved little-endian float32 (I, Q) pairs. Throws IoError when
/// the file cannot be opened and FormatError when its length is not a
/// multiple of 8 bytes.
IqStream read_iq(const std::filesystem::path& path, double sample_rate_hz, double center_freq_hz);

/// Writes the stream as interleaved little-endian float32; samples are
/// narrowed from double.
void write_iq(const IqStream& stream, const std::filesystem::path& path);

// Optional JSON sidecar `<name>.meta.json` next to a capture file.
struct CaptureMeta {
    std::optional<double> sample_rate_hz;
    std::optional<double> center_freq_hz;
    std::string description;
};

std::filesystem::path sidecar_path(const std::filesystem::path& capture);
std::optional<CaptureMeta> read_sidecar(const std::filesystem::path& capture);
void write_sidecar(const std::filesystem::path& capture, const IqStream& stream,
                   const std::string& description);

// Total energy sum |x|^2 divided by the sample rate (power times duration).
double energy(const IqStream& stream);
double mean_power(const IqStream& stream);

} // namespace btfp
