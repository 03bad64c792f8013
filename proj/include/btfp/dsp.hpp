#pragma once

// Pure DSP primitives over IqStream. None of these keep state between calls.

#include <cstddef>
#include <vector>

#include "btfp/iq.hpp"

namespace btfp::dsp {

enum class Window { hamming, kaiser };

/// Linear-phase low-pass taps by the window method, normalised to unit DC gain.
/// `cutoff_hz` is the -6 dB point. `ntaps` must be odd.
std::vector<double> windowed_sinc(std::size_t ntaps, double cutoff_hz, double sample_rate_hz,
                                  Window window, double kaiser_beta = 0.0);

// Anti-imaging filter used by interpolate_x2.
inline constexpr std::size_t kInterpolatorTaps = 127;
inline constexpr double kInterpolatorKaiserBeta = 7.0;

/// Per-packet low-pass defaults: passband edge and transition width.
inline constexpr double kDefaultLowpassCutoffHz = 600e3;
inline constexpr double kDefaultLowpassTransitionHz = 200e3;

struct LowpassDesign {
    std::vector<double> taps;

    std::size_t length() const { return taps.size(); }
    // Samples at each edge of a filtered block that see the zero padding.
    std::size_t transient_samples() const { return taps.size() / 2; }
};

/// Hamming windowed-sinc passing [0, cutoff] and stopping from cutoff + transition,
/// with ceil(3.3 * fs / transition) taps (rounded up to odd).
LowpassDesign design_lowpass(double cutoff_hz, double transition_hz, double sample_rate_hz);

/// Multiplies sample n by exp(2*pi*i*shift_hz*n/fs). Throws ParameterError if
/// |shift_hz| >= fs/2.
IqStream frequency_shift(IqStream stream, double shift_hz);

/// Doubles the sample rate by zero-stuffing and a 127-tap Kaiser windowed-sinc
/// half-band filter. Output sample 2m lines up with input sample m.
IqStream interpolate_x2(const IqStream& stream);

/// Zero-phase ("same" length) linear-phase FIR low-pass. The first and last
/// design.transient_samples() outputs are contaminated by the edge padding.
IqStream fir_lowpass(const IqStream& stream, double cutoff_hz, double transition_hz);
IqStream fir_lowpass(const IqStream& stream, const LowpassDesign& design);

/// Phase-difference discriminator: value n is arg(x[n+1] conj(x[n])) fs / 2pi
/// in Hz. Output has N-1 values.
RealSeries quadrature_demod(const IqStream& stream);

struct SpectrumBin {
    double freq_hz;  // absolute: center_freq_hz + baseband offset
    double power;
};

/// Welch periodogram (Hann window, 50% overlap), bins ordered from -fs/2 to
/// +fs/2. Scaled so the bins sum to the mean sample power.
std::vector<SpectrumBin> power_spectrum(const IqStream& stream, std::size_t nfft);

/// Samples [begin, end) of a stream with the same rate and centre.
IqStream slice(const IqStream& stream, std::size_t begin, std::size_t end);

} // namespace btfp::dsp
