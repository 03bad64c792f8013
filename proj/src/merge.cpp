#include "btfp/merge.hpp"

#include <algorithm>
#include <cmath>

#include "btfp/dsp.hpp"
#include "btfp/error.hpp"

namespace btfp {

IqStream merge_streams(const IqStream& lower, const IqStream& upper, std::int64_t offset_samples) {
    const double rate = lower.sample_rate_hz;
    if (upper.sample_rate_hz != rate)
        throw ParameterError("half-band captures have different sample rates");
    const double spacing = upper.center_freq_hz - lower.center_freq_hz;
    if (std::abs(spacing - rate) > 1e-6 * rate)
        throw ParameterError("centre spacing " + std::to_string(spacing) + " Hz differs from the sample rate " +
                             std::to_string(rate) + " Hz");

    // Upper sample j pairs with lower sample j + offset.
    const auto nl = static_cast<std::int64_t>(lower.size());
    const auto nu = static_cast<std::int64_t>(upper.size());
    const std::int64_t lower_begin = std::max<std::int64_t>(0, offset_samples);
    const std::int64_t upper_begin = std::max<std::int64_t>(0, -offset_samples);
    const std::int64_t common = std::min(nl - lower_begin, nu - upper_begin);
    if (common <= 0) throw ParameterError("captures do not overlap after the sample offset");

    auto lo = dsp::interpolate_x2(dsp::slice(lower, static_cast<std::size_t>(lower_begin),
                                             static_cast<std::size_t>(lower_begin + common)));
    lo = dsp::frequency_shift(std::move(lo), -rate / 2.0);
    auto hi = dsp::interpolate_x2(dsp::slice(upper, static_cast<std::size_t>(upper_begin),
                                             static_cast<std::size_t>(upper_begin + common)));
    hi = dsp::frequency_shift(std::move(hi), rate / 2.0);

    for (std::size_t n = 0; n < lo.size(); ++n) lo.samples[n] += hi.samples[n];
    lo.center_freq_hz = 0.5 * (lower.center_freq_hz + upper.center_freq_hz);
    return lo;
}

} // namespace btfp
