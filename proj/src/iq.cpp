#include "btfp/iq.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "btfp/error.hpp"

namespace btfp {

namespace {

float load_le_float(const unsigned char* p) {
    std::uint32_t bits = 0;
    for (int i = 3; i >= 0; --i) bits = (bits << 8) | p[i];
    return std::bit_cast<float>(bits);
}

void store_le_float(float v, unsigned char* p) {
    auto bits = std::bit_cast<std::uint32_t>(v);
    for (int i = 0; i < 4; ++i) {
        p[i] = static_cast<unsigned char>(bits & 0xffu);
        bits >>= 8;
    }
}

} // namespace

void validate(const IqStream& stream) {
    if (!(stream.sample_rate_hz > 0.0) || !std::isfinite(stream.sample_rate_hz))
        throw ParameterError("sample rate must be positive, got " + std::to_string(stream.sample_rate_hz));
    for (const auto& s : stream.samples) {
        if (!std::isfinite(s.real()) || !std::isfinite(s.imag()))
            throw ParameterError("stream contains a non-finite sample");
    }
}

IqStream read_iq(const std::filesystem::path& path, double sample_rate_hz, double center_freq_hz) {
    if (!(sample_rate_hz > 0.0)) throw ParameterError("sample rate must be positive");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open capture file " + path.string());
    in.seekg(0, std::ios::end);
    const auto bytes = static_cast<std::uint64_t>(in.tellg());
    in.seekg(0, std::ios::beg);
    if (bytes % 8 != 0)
        throw FormatError("capture file " + path.string() + " has " + std::to_string(bytes) +
                          " bytes, not a multiple of 8");

    std::vector<unsigned char> raw(bytes);
    if (bytes > 0 && !in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(bytes)))
        throw IoError("short read on " + path.string());

    IqStream out;
    out.sample_rate_hz = sample_rate_hz;
    out.center_freq_hz = center_freq_hz;
    out.samples.resize(bytes / 8);
    for (std::size_t n = 0; n < out.samples.size(); ++n) {
        const unsigned char* p = raw.data() + 8 * n;
        out.samples[n] = cd(load_le_float(p), load_le_float(p + 4));
    }
    return out;
}

void write_iq(const IqStream& stream, const std::filesystem::path& path) {
    std::vector<unsigned char> raw(stream.samples.size() * 8);
    for (std::size_t n = 0; n < stream.samples.size(); ++n) {
        unsigned char* p = raw.data() + 8 * n;
        store_le_float(static_cast<float>(stream.samples[n].real()), p);
        store_le_float(static_cast<float>(stream.samples[n].imag()), p + 4);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out) throw IoError("write failed on " + path.string());
}

std::filesystem::path sidecar_path(const std::filesystem::path& capture) {
    auto p = capture;
    p.replace_extension(".meta.json");
    return p;
}

std::optional<CaptureMeta> read_sidecar(const std::filesystem::path& capture) {
    const auto path = sidecar_path(capture);
    std::ifstream in(path);
    if (!in) return std::nullopt;
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("bad sidecar " + path.string() + ": " + e.what());
    }
    CaptureMeta meta;
    if (j.contains("sample_rate_hz")) meta.sample_rate_hz = j.at("sample_rate_hz").get<double>();
    if (j.contains("center_freq_hz")) meta.center_freq_hz = j.at("center_freq_hz").get<double>();
    if (j.contains("description")) meta.description = j.at("description").get<std::string>();
    return meta;
}

void write_sidecar(const std::filesystem::path& capture, const IqStream& stream,
                   const std::string& description) {
    nlohmann::ordered_json j;
    j["sample_rate_hz"] = stream.sample_rate_hz;
    j["center_freq_hz"] = stream.center_freq_hz;
    j["description"] = description;
    const auto path = sidecar_path(capture);
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

double energy(const IqStream& stream) {
    double acc = 0.0;
    for (const auto& s : stream.samples) acc += std::norm(s);
    return acc / stream.sample_rate_hz;
}

double mean_power(const IqStream& stream) {
    if (stream.empty()) return 0.0;
    double acc = 0.0;
    for (const auto& s : stream.samples) acc += std::norm(s);
    return acc / static_cast<double>(stream.size());
}

} // namespace btfp
