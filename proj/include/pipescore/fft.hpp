#pragma once

#include <complex>
#include <vector>

namespace pipescore {

// In-place iterative radix-2 FFT. n must be a power of two.
void fft_inplace(std::vector<std::complex<double>>& a, bool inverse = false);

size_t next_pow2(size_t n);

// Magnitude spectrum of a real frame, zero-padded to fft_len (power of two).
// Returns fft_len/2 + 1 bins.
std::vector<double> magnitude_spectrum(const std::vector<double>& frame, size_t fft_len);

// Linear convolution, single zero-padded FFT block.
std::vector<float> fft_convolve(const std::vector<float>& x, const std::vector<float>& h);

}  // namespace pipescore
