#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace vstkit {

using Complex = std::complex<double>;

constexpr bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

constexpr std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Iterative radix-2 decimation-in-time FFT, in place.
// Forward: X[j] = sum_k x[k] exp(-2 pi i j k / N). The inverse includes 1/N.
// Throws Error(InvalidArgument) unless data.size() is a power of two.
void fft_inplace(std::span<Complex> data, bool inverse = false);

// Real input zero-padded to n_fft (n_fft >= x.size(), power of two).
std::vector<Complex> fft_real(std::span<const double> x, std::size_t n_fft);

}  // namespace vstkit
