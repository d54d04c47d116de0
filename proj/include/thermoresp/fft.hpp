#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

// Real-input discrete Fourier transform (FFTW backend).

namespace thermoresp::fft {

/// Non-negative frequency half of the DFT: n/2 + 1 bins, unnormalized.
std::vector<std::complex<double>> rfft(std::span<const double> x);

/// Inverse of rfft for a length-n signal, scaled by 1/n so that
/// irfft(rfft(x), x.size()) == x up to rounding.
std::vector<double> irfft(std::span<const std::complex<double>> spectrum, std::size_t n);

/// Frequency in Hz of bin k for a length-n transform at sampling rate fs.
inline double bin_frequency(std::size_t k, std::size_t n, double fs) noexcept {
  return static_cast<double>(k) * fs / static_cast<double>(n);
}

}  // namespace thermoresp::fft
