#include "btfp/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "btfp/error.hpp"
#include "btfp/fft.hpp"
#include "btfp/kernels.hpp"

namespace btfp::dsp {

namespace {

constexpr double kPi = std::numbers::pi;

double window_value(Window window, std::size_t n, std::size_t ntaps, double beta) {
    const double m = static_cast<double>(ntaps - 1);
    switch (window) {
    case Window::hamming:
        return 0.54 - 0.46 * std::cos(2.0 * kPi * static_cast<double>(n) / m);
    case Window::kaiser: {
        const double r = 2.0 * static_cast<double>(n) / m - 1.0;
        return std::cyl_bessel_i(0.0, beta * std::sqrt(std::max(0.0, 1.0 - r * r))) /
               std::cyl_bessel_i(0.0, beta);
    }
    }
    return 1.0;
}

// Convolves with odd-length symmetric taps and returns the centred output of
// the same length as the input (zero padding outside).
std::vector<cd> filter_same(const std::vector<cd>& x, const std::vector<double>& taps) {
    const std::size_t half = taps.size() / 2;
    std::vector<cd> padded(x.size() + 2 * half);
    std::copy(x.begin(), x.end(), padded.begin() + static_cast<std::ptrdiff_t>(half));
    std::vector<cd> out(x.size());
    kernels::active().fir(padded, taps, out, 1);
    return out;
}

} // namespace

std::vector<double> windowed_sinc(std::size_t ntaps, double cutoff_hz, double sample_rate_hz,
                                  Window window, double kaiser_beta) {
    if (ntaps == 0 || ntaps % 2 == 0) throw ParameterError("filter length must be odd");
    if (!(cutoff_hz > 0.0) || !(cutoff_hz < sample_rate_hz / 2.0))
        throw ParameterError("cutoff must lie in (0, fs/2)");
    const double fc = 2.0 * cutoff_hz / sample_rate_hz;  // fraction of Nyquist
    const double mid = static_cast<double>(ntaps - 1) / 2.0;
    std::vector<double> taps(ntaps);
    // Computed on one half and mirrored so the taps are exactly symmetric.
    for (std::size_t n = 0; n <= ntaps / 2; ++n) {
        const double x = fc * (static_cast<double>(n) - mid);
        double s;
        if (x == 0.0)
            s = 1.0;
        else if (x == std::round(x))
            s = 0.0;  // exact zero crossing of the sinc
        else
            s = std::sin(kPi * x) / (kPi * x);
        taps[n] = fc * s * window_value(window, n, ntaps, kaiser_beta);
        taps[ntaps - 1 - n] = taps[n];
    }
    const double sum = std::accumulate(taps.begin(), taps.end(), 0.0);
    for (double& t : taps) t /= sum;
    return taps;
}

LowpassDesign design_lowpass(double cutoff_hz, double transition_hz, double sample_rate_hz) {
    if (!(cutoff_hz > 0.0) || !(transition_hz > 0.0) ||
        !(cutoff_hz + transition_hz < sample_rate_hz / 2.0))
        throw ParameterError("low-pass needs 0 < cutoff and cutoff + transition < fs/2");
    auto ntaps = static_cast<std::size_t>(std::ceil(3.3 * sample_rate_hz / transition_hz));
    if (ntaps % 2 == 0) ++ntaps;
    // Passband to cutoff, stopband from cutoff + transition: the sinc sits mid-transition.
    return {windowed_sinc(ntaps, cutoff_hz + transition_hz / 2.0, sample_rate_hz, Window::hamming)};
}

IqStream frequency_shift(IqStream stream, double shift_hz) {
    if (!(std::abs(shift_hz) < stream.sample_rate_hz / 2.0))
        throw ParameterError("frequency shift " + std::to_string(shift_hz) +
                             " Hz is outside the representable band");
    if (shift_hz == 0.0) return stream;
    auto& s = stream.samples;
    kernels::active().rotate(s, s, 0.0, shift_hz / stream.sample_rate_hz);
    return stream;
}

IqStream interpolate_x2(const IqStream& stream) {
    const std::size_t n = stream.size();
    if (n < kInterpolatorTaps)
        throw ParameterError("interpolation needs at least " + std::to_string(kInterpolatorTaps) +
                             " samples, got " + std::to_string(n));
    const double out_rate = 2.0 * stream.sample_rate_hz;
    auto taps = windowed_sinc(kInterpolatorTaps, stream.sample_rate_hz / 2.0, out_rate,
                              Window::kaiser, kInterpolatorKaiserBeta);
    for (double& t : taps) t *= 2.0;  // zero-stuffing halves the amplitude

    // Polyphase split: with h symmetric about index 63, output 2m uses the odd
    // taps and output 2m+1 the even taps, both over x[m-31 ...].
    std::vector<double> odd_taps, even_taps;
    for (std::size_t k = 0; k < taps.size(); ++k) (k % 2 ? odd_taps : even_taps).push_back(taps[k]);
    const std::size_t left = 31;
    std::vector<cd> padded(n + left + 32);
    std::copy(stream.samples.begin(), stream.samples.end(), padded.begin() + left);

    std::vector<cd> even_out(n), odd_out(n);
    const auto& k = kernels::active();
    k.fir(padded, odd_taps, even_out, 1);
    k.fir(padded, even_taps, odd_out, 1);

    IqStream out;
    out.sample_rate_hz = out_rate;
    out.center_freq_hz = stream.center_freq_hz;
    out.samples.resize(2 * n);
    for (std::size_t m = 0; m < n; ++m) {
        out.samples[2 * m] = even_out[m];
        out.samples[2 * m + 1] = odd_out[m];
    }
    return out;
}

IqStream fir_lowpass(const IqStream& stream, double cutoff_hz, double transition_hz) {
    return fir_lowpass(stream, design_lowpass(cutoff_hz, transition_hz, stream.sample_rate_hz));
}

IqStream fir_lowpass(const IqStream& stream, const LowpassDesign& design) {
    IqStream out;
    out.sample_rate_hz = stream.sample_rate_hz;
    out.center_freq_hz = stream.center_freq_hz;
    out.samples = filter_same(stream.samples, design.taps);
    return out;
}

RealSeries quadrature_demod(const IqStream& stream) {
    if (stream.size() < 2) throw ParameterError("quadrature demodulation needs at least 2 samples");
    RealSeries out;
    out.sample_rate_hz = stream.sample_rate_hz;
    out.values.resize(stream.size() - 1);
    const double scale = stream.sample_rate_hz / (2.0 * kPi);
    for (std::size_t n = 1; n < stream.size(); ++n) {
        const cd a = stream.samples[n], b = stream.samples[n - 1];
        // a * conj(b)
        const double re = a.real() * b.real() + a.imag() * b.imag();
        const double im = a.imag() * b.real() - a.real() * b.imag();
        out.values[n - 1] = std::atan2(im, re) * scale;
    }
    return out;
}

std::vector<SpectrumBin> power_spectrum(const IqStream& stream, std::size_t nfft) {
    if (nfft < 2 || (nfft & (nfft - 1)) != 0)
        throw ParameterError("nfft must be a power of two >= 2");
    if (stream.size() < nfft)
        throw ParameterError("stream of " + std::to_string(stream.size()) +
                             " samples is shorter than nfft " + std::to_string(nfft));

    std::vector<double> window(nfft);
    double wsum2 = 0.0;
    for (std::size_t n = 0; n < nfft; ++n) {
        window[n] = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(n) / static_cast<double>(nfft));
        wsum2 += window[n] * window[n];
    }

    Fft fft(nfft);
    std::vector<cd> seg(nfft);
    std::vector<double> acc(nfft, 0.0);
    const std::size_t hop = nfft / 2;
    std::size_t segments = 0;
    for (std::size_t start = 0; start + nfft <= stream.size(); start += hop) {
        for (std::size_t n = 0; n < nfft; ++n) seg[n] = stream.samples[start + n] * window[n];
        fft.forward(seg);
        for (std::size_t k = 0; k < nfft; ++k) acc[k] += std::norm(seg[k]);
        ++segments;
    }

    const double scale = 1.0 / (static_cast<double>(segments) * static_cast<double>(nfft) * wsum2);
    const double df = stream.sample_rate_hz / static_cast<double>(nfft);
    std::vector<SpectrumBin> bins(nfft);
    for (std::size_t i = 0; i < nfft; ++i) {
        const std::size_t k = (i + nfft / 2) % nfft;  // fftshift
        const double offset = (static_cast<double>(i) - static_cast<double>(nfft / 2)) * df;
        bins[i] = {stream.center_freq_hz + offset, acc[k] * scale};
    }
    return bins;
}

IqStream slice(const IqStream& stream, std::size_t begin, std::size_t end) {
    if (begin > end || end > stream.size()) throw ParameterError("slice out of range");
    IqStream out;
    out.sample_rate_hz = stream.sample_rate_hz;
    out.center_freq_hz = stream.center_freq_hz;
    out.samples.assign(stream.samples.begin() + static_cast<std::ptrdiff_t>(begin),
                       stream.samples.begin() + static_cast<std::ptrdiff_t>(end));
    return out;
}

} // namespace btfp::dsp
