#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace btfp {

/// Forward complex DFT of a fixed size, X[k] = sum_n x[n] exp(-2*pi*i*k*n/N).
/// Owns an FFTW plan; not copyable.
class Fft {
public:
    explicit Fft(std::size_t n);
    ~Fft();
    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;

    std::size_t size() const { return n_; }

    // Transforms `data` in place; data.size() must equal size().
    void forward(std::span<std::complex<double>> data);

private:
    std::size_t n_;
    std::complex<double>* buf_ = nullptr;
    void* plan_ = nullptr;
};

} // namespace btfp
