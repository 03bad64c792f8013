#include <doctest.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "btfp/error.hpp"
#include "btfp/iq.hpp"
#include "support.hpp"

using namespace btfp;

namespace {

void write_bytes(const std::filesystem::path& p, const std::vector<unsigned char>& bytes) {
    std::ofstream out(p, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::vector<unsigned char> read_bytes(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

TEST_CASE("read_iq decodes interleaved little-endian float32 pairs") {
    ts::TempDir dir("iq");
    // (1,0), (0,1)
    write_bytes(dir.path / "a.data", {0, 0, 0x80, 0x3f, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0x80, 0x3f});
    const auto s = read_iq(dir.path / "a.data", 40e6, 2421.5e6);
    REQUIRE(s.size() == 2);
    CHECK(s.samples[0] == cd(1.0, 0.0));
    CHECK(s.samples[1] == cd(0.0, 1.0));
    CHECK(s.sample_rate_hz == 40e6);
    CHECK(s.center_freq_hz == 2421.5e6);
}

TEST_CASE("read_iq of an empty file is an empty stream") {
    ts::TempDir dir("iq");
    write_bytes(dir.path / "e.data", {});
    CHECK(read_iq(dir.path / "e.data", 1e6, 0.0).empty());
}

TEST_CASE("read_iq rejects a length that is not a whole number of samples") {
    ts::TempDir dir("iq");
    write_bytes(dir.path / "bad.data", std::vector<unsigned char>(12, 0));
    try {
        read_iq(dir.path / "bad.data", 1e6, 0.0);
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(std::string(e.what()).find("12") != std::string::npos);
    }
}

TEST_CASE("read_iq on a missing file is an I/O error") {
    ts::TempDir dir("iq");
    CHECK_THROWS_AS(read_iq(dir.path / "nope.data", 1e6, 0.0), IoError);
}

TEST_CASE("write_iq encodes I then Q as little-endian float32") {
    ts::TempDir dir("iq");
    IqStream s{{cd(1.0, 2.0)}, 1e6, 0.0};
    write_iq(s, dir.path / "o.data");
    CHECK(read_bytes(dir.path / "o.data") == std::vector<unsigned char>{0, 0, 0x80, 0x3f, 0, 0, 0, 0x40});

    write_iq(IqStream{{}, 1e6, 0.0}, dir.path / "empty.data");
    CHECK(std::filesystem::file_size(dir.path / "empty.data") == 0);
}

TEST_CASE("write_iq to an unwritable path is an I/O error") {
    ts::TempDir dir("iq");
    CHECK_THROWS_AS(write_iq(IqStream{{cd(1, 1)}, 1e6, 0.0}, dir.path / "missing" / "x.data"), IoError);
}

TEST_CASE("read_iq after write_iq is bit-exact for float-representable samples") {
    ts::TempDir dir("iq");
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<float> u(-3.0f, 3.0f);
    IqStream s{{}, 80e6, 2441.5e6};
    for (int i = 0; i < 5000; ++i) s.samples.emplace_back(u(rng), u(rng));
    s.samples.emplace_back(std::numeric_limits<float>::denorm_min(), -0.0f);
    s.samples.emplace_back(std::numeric_limits<float>::max(), std::numeric_limits<float>::lowest());
    write_iq(s, dir.path / "r.data");
    const auto back = read_iq(dir.path / "r.data", s.sample_rate_hz, s.center_freq_hz);
    REQUIRE(back.size() == s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        CHECK(std::memcmp(&back.samples[i], &s.samples[i], sizeof(cd)) == 0);
    }
}

TEST_CASE("sidecar metadata round-trips and is optional") {
    ts::TempDir dir("iq");
    const auto cap = dir.path / "lower.data";
    CHECK(sidecar_path(cap) == dir.path / "lower.meta.json");
    CHECK_FALSE(read_sidecar(cap).has_value());

    IqStream s{{cd(0, 0)}, 40e6, 2421.5e6};
    write_sidecar(cap, s, "lower half");
    const auto meta = read_sidecar(cap);
    REQUIRE(meta.has_value());
    CHECK(meta->sample_rate_hz == 40e6);
    CHECK(meta->center_freq_hz == 2421.5e6);
    CHECK(meta->description == "lower half");
}

TEST_CASE("validate rejects bad rates and non-finite samples") {
    CHECK_NOTHROW(validate(IqStream{{cd(1, 1)}, 1.0, 0.0}));
    CHECK_THROWS_AS(validate(IqStream{{cd(1, 1)}, 0.0, 0.0}), ParameterError);
    CHECK_THROWS_AS(validate(IqStream{{cd(std::nan(""), 0)}, 1.0, 0.0}), ParameterError);
    CHECK_THROWS_AS(validate(IqStream{{cd(0, INFINITY)}, 1.0, 0.0}), ParameterError);
}

TEST_CASE("energy is power times duration") {
    IqStream s{std::vector<cd>(1000, cd(0.6, 0.8)), 1e3, 0.0};
    CHECK(mean_power(s) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(energy(s) == doctest::Approx(1.0).epsilon(1e-12));
}
