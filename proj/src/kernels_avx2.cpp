// AVX2 variants. Compiled with -mavx2 -mfma; only reached after a CPUID check.
// Accumulation order matches the scalar kernels, so fir/power/sq_dist2 agree
// bit for bit; rotate agrees to rounding of the phasor recurrence.

#include <immintrin.h>

#include <algorithm>

#include "btfp/kernels.hpp"
#include "kernels_internal.hpp"

namespace btfp::kernels {

namespace {

// (a0, a1) * (b0, b1) elementwise complex product on packed [re, im, re, im].
inline __m256d cmul(__m256d a, __m256d b) {
    const __m256d b_re = _mm256_movedup_pd(b);
    const __m256d b_im = _mm256_permute_pd(b, 0xF);
    const __m256d a_sw = _mm256_permute_pd(a, 0x5);
    return _mm256_addsub_pd(_mm256_mul_pd(a, b_re), _mm256_mul_pd(a_sw, b_im));
}

inline __m256d pack2(cd lo, cd hi) { return _mm256_setr_pd(lo.real(), lo.imag(), hi.real(), hi.imag()); }

void rotate_avx2(std::span<const cd> in, std::span<cd> out, double phase0, double step) {
    const std::size_t n = in.size();
    const cd w = unit_phasor(step);
    const cd w2 = w * w;
    const __m256d step2 = pack2(w2, w2);
    const double* src = reinterpret_cast<const double*>(in.data());
    double* dst = reinterpret_cast<double*>(out.data());

    for (std::size_t b = 0; b < n; b += kRotateBlock) {
        const std::size_t end = std::min(n, b + kRotateBlock);
        const cd r0 = unit_phasor(wrapped_phase(phase0, step, b));
        const cd r1(r0.real() * w.real() - r0.imag() * w.imag(), r0.real() * w.imag() + r0.imag() * w.real());
        __m256d rot = pack2(r0, r1);
        std::size_t i = b;
        for (; i + 2 <= end; i += 2) {
            const __m256d x = _mm256_loadu_pd(src + 2 * i);
            _mm256_storeu_pd(dst + 2 * i, cmul(x, rot));
            rot = cmul(rot, step2);
        }
        if (i < end) {
            alignas(32) double r[4];
            _mm256_store_pd(r, rot);
            const double xr = in[i].real(), xi = in[i].imag();
            out[i] = cd(xr * r[0] - xi * r[1], xr * r[1] + xi * r[0]);
        }
    }
}

inline __m256d load_pair(const cd* base, std::size_t stride, std::size_t k) {
    if (stride == 1) return _mm256_loadu_pd(reinterpret_cast<const double*>(base + k));
    const __m128d lo = _mm_loadu_pd(reinterpret_cast<const double*>(base + k));
    const __m128d hi = _mm_loadu_pd(reinterpret_cast<const double*>(base + stride + k));
    return _mm256_insertf128_pd(_mm256_castpd128_pd256(lo), hi, 1);
}

void fir_avx2(std::span<const cd> in, std::span<const double> taps, std::span<cd> out,
              std::size_t stride) {
    const std::size_t nt = taps.size();
    const std::size_t nout = out.size();
    double* dst = reinterpret_cast<double*>(out.data());
    std::size_t n = 0;
    for (; n + 8 <= nout; n += 8) {
        const cd* x0 = in.data() + n * stride;
        const cd* x1 = x0 + 2 * stride;
        const cd* x2 = x0 + 4 * stride;
        const cd* x3 = x0 + 6 * stride;
        __m256d a0 = _mm256_setzero_pd(), a1 = _mm256_setzero_pd();
        __m256d a2 = _mm256_setzero_pd(), a3 = _mm256_setzero_pd();
        for (std::size_t k = 0; k < nt; ++k) {
            const __m256d t = _mm256_broadcast_sd(&taps[k]);
            a0 = _mm256_add_pd(a0, _mm256_mul_pd(t, load_pair(x0, stride, k)));
            a1 = _mm256_add_pd(a1, _mm256_mul_pd(t, load_pair(x1, stride, k)));
            a2 = _mm256_add_pd(a2, _mm256_mul_pd(t, load_pair(x2, stride, k)));
            a3 = _mm256_add_pd(a3, _mm256_mul_pd(t, load_pair(x3, stride, k)));
        }
        _mm256_storeu_pd(dst + 2 * n, a0);
        _mm256_storeu_pd(dst + 2 * n + 4, a1);
        _mm256_storeu_pd(dst + 2 * n + 8, a2);
        _mm256_storeu_pd(dst + 2 * n + 12, a3);
    }
    for (; n + 2 <= nout; n += 2) {
        const cd* x0 = in.data() + n * stride;
        __m256d a0 = _mm256_setzero_pd();
        for (std::size_t k = 0; k < nt; ++k)
            a0 = _mm256_add_pd(a0, _mm256_mul_pd(_mm256_broadcast_sd(&taps[k]), load_pair(x0, stride, k)));
        _mm256_storeu_pd(dst + 2 * n, a0);
    }
    if (n < nout) scalar().fir(in.subspan(n * stride), taps, out.subspan(n), stride);
}

void power_avx2(std::span<const cd> in, std::span<double> out) {
    const std::size_t n = in.size();
    const double* src = reinterpret_cast<const double*>(in.data());
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d a = _mm256_loadu_pd(src + 2 * i);
        const __m256d b = _mm256_loadu_pd(src + 2 * i + 4);
        const __m256d s = _mm256_hadd_pd(_mm256_mul_pd(a, a), _mm256_mul_pd(b, b));
        _mm256_storeu_pd(out.data() + i, _mm256_permute4x64_pd(s, 0xD8));
    }
    if (i < n) scalar().power(in.subspan(i), out.subspan(i));
}

void sq_dist2_avx2(std::span<const double> xs, std::span<const double> ys, double qx, double qy,
                   std::span<double> out) {
    const std::size_t n = xs.size();
    const __m256d vx = _mm256_set1_pd(qx), vy = _mm256_set1_pd(qy);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(xs.data() + i), vx);
        const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(ys.data() + i), vy);
        _mm256_storeu_pd(out.data() + i, _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy)));
    }
    if (i < n) scalar().sq_dist2(xs.subspan(i), ys.subspan(i), qx, qy, out.subspan(i));
}

} // namespace

const KernelTable& avx2_table() {
    static const KernelTable table{"avx2", rotate_avx2, fir_avx2, power_avx2, sq_dist2_avx2};
    return table;
}

} // namespace btfp::kernels
