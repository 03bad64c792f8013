#include "btfp/fft.hpp"

#include <algorithm>

#include <fftw3.h>

#include "btfp/error.hpp"

namespace btfp {

Fft::Fft(std::size_t n) : n_(n) {
    if (n == 0) throw ParameterError("FFT size must be positive");
    buf_ = reinterpret_cast<std::complex<double>*>(fftw_malloc(sizeof(fftw_complex) * n));
    auto* b = reinterpret_cast<fftw_complex*>(buf_);
    plan_ = fftw_plan_dft_1d(static_cast<int>(n), b, b, FFTW_FORWARD, FFTW_ESTIMATE);
}

Fft::~Fft() {
    if (plan_) fftw_destroy_plan(static_cast<fftw_plan>(plan_));
    if (buf_) fftw_free(buf_);
}

void Fft::forward(std::span<std::complex<double>> data) {
    if (data.size() != n_) throw ParameterError("FFT input length mismatch");
    std::copy(data.begin(), data.end(), buf_);
    fftw_execute(static_cast<fftw_plan>(plan_));
    std::copy(buf_, buf_ + n_, data.begin());
}

} // namespace btfp
