#include <cmath>
#include <numbers>

#include "btfp/kernels.hpp"
#include "kernels_internal.hpp"

namespace btfp::kernels {

namespace {

void rotate_scalar(std::span<const cd> in, std::span<cd> out, double phase0, double step) {
    const std::size_t n = in.size();
    const cd w = unit_phasor(step);
    for (std::size_t b = 0; b < n; b += kRotateBlock) {
        const std::size_t end = std::min(n, b + kRotateBlock);
        cd rot = unit_phasor(wrapped_phase(phase0, step, b));
        for (std::size_t i = b; i < end; ++i) {
            const double xr = in[i].real(), xi = in[i].imag();
            out[i] = cd(xr * rot.real() - xi * rot.imag(), xr * rot.imag() + xi * rot.real());
            rot = cd(rot.real() * w.real() - rot.imag() * w.imag(),
                     rot.real() * w.imag() + rot.imag() * w.real());
        }
    }
}

void fir_scalar(std::span<const cd> in, std::span<const double> taps, std::span<cd> out,
                std::size_t stride) {
    const std::size_t nt = taps.size();
    for (std::size_t n = 0; n < out.size(); ++n) {
        const cd* x = in.data() + n * stride;
        double re = 0.0, im = 0.0;
        for (std::size_t k = 0; k < nt; ++k) {
            re += taps[k] * x[k].real();
            im += taps[k] * x[k].imag();
        }
        out[n] = cd(re, im);
    }
}

void power_scalar(std::span<const cd> in, std::span<double> out) {
    for (std::size_t n = 0; n < in.size(); ++n) {
        const double re = in[n].real(), im = in[n].imag();
        out[n] = re * re + im * im;
    }
}

void sq_dist2_scalar(std::span<const double> xs, std::span<const double> ys, double qx, double qy,
                     std::span<double> out) {
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - qx;
        const double dy = ys[i] - qy;
        out[i] = dx * dx + dy * dy;
    }
}

} // namespace

const KernelTable& scalar() {
    static const KernelTable table{"scalar", rotate_scalar, fir_scalar, power_scalar, sq_dist2_scalar};
    return table;
}

} // namespace btfp::kernels
