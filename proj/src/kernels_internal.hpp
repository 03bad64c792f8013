#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>

namespace btfp::kernels {

inline std::complex<double> unit_phasor(double cycles) {
    const double a = 2.0 * std::numbers::pi * cycles;
    return {std::cos(a), std::sin(a)};
}

// Fractional part of phase0 + n*step, in cycles.
inline double wrapped_phase(double phase0, double step, std::size_t n) {
    const double p = phase0 + static_cast<double>(n) * step;
    return p - std::floor(p);
}

} // namespace btfp::kernels
