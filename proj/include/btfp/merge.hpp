#pragma once

#include <cstdint>

#include "btfp/iq.hpp"

namespace btfp {

// Centre frequencies and rate of the two half-band recorders.
inline constexpr double kLowerCenterHz = 2421.5e6;
inline constexpr double kUpperCenterHz = 2461.5e6;
inline constexpr double kHalfBandRateHz = 40e6;

/// Combines two adjacent half-band captures into one stream at twice the rate:
/// both are interpolated x2, the lower is shifted by -rate/2 and the upper by
/// +rate/2, then they are summed. `offset_samples` delays (positive) or
/// advances (negative) the upper capture relative to the lower before merging;
/// the output starts at the first instant covered by both captures.
///
/// Throws ParameterError on mismatched rates, centre spacing different from the
/// rate, or no overlap after the offset.
IqStream merge_streams(const IqStream& lower, const IqStream& upper, std::int64_t offset_samples = 0);

} // namespace btfp
