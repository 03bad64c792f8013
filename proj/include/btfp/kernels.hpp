#pragma once

// Inner-loop kernels with a portable scalar reference and ISA-specific
// variants. One table is chosen at first use; every variant must agree with
// the scalar table to rounding (see tests/test_kernels.cpp).

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>

namespace btfp::kernels {

using cd = std::complex<double>;

struct KernelTable {
    std::string_view name;

    // out[n] = in[n] * exp(2*pi*i*(phase0 + n*step)), phases in cycles.
    void (*rotate)(std::span<const cd> in, std::span<cd> out, double phase0, double step);

    // out[n] = sum_k taps[k] * in[n*stride + k]. Caller sizes `in` so every
    // read is in range: in.size() >= (out.size()-1)*stride + taps.size().
    void (*fir)(std::span<const cd> in, std::span<const double> taps, std::span<cd> out,
                std::size_t stride);

    // out[n] = |in[n]|^2
    void (*power)(std::span<const cd> in, std::span<double> out);

    // out[i] = (xs[i]-qx)^2 + (ys[i]-qy)^2
    void (*sq_dist2)(std::span<const double> xs, std::span<const double> ys, double qx, double qy,
                     std::span<double> out);
};

const KernelTable& scalar();

// Null when the CPU or the build lacks AVX2+FMA.
const KernelTable* avx2();

// Best table for this CPU; BTFP_KERNELS=scalar|avx2 overrides.
const KernelTable& active();

// Samples between exact re-anchors of the rotator recurrence.
inline constexpr std::size_t kRotateBlock = 64;

} // namespace btfp::kernels
