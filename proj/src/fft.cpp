#include "vstkit/fft.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "vstkit/error.hpp"

namespace vstkit {

void fft_inplace(std::span<Complex> data, bool inverse) {
  const std::size_t n = data.size();
  if (!is_power_of_two(n)) {
    throw Error(Errc::InvalidArgument, "FFT length " + std::to_string(n) + " is not a power of two");
  }
  if (n == 1) return;

  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }

  // Twiddles are evaluated directly rather than by recurrence so rounding
  // does not accumulate across a stage.
  const double sign = inverse ? 1.0 : -1.0;
  std::vector<Complex> twiddle(n / 2);
  for (std::size_t k = 0; k < n / 2; ++k) {
    const double angle = sign * 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    twiddle[k] = {std::cos(angle), std::sin(angle)};
  }

  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = n / len;
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const Complex u = data[start + k];
        const Complex v = data[start + k + half] * twiddle[k * stride];
        data[start + k] = u + v;
        data[start + k + half] = u - v;
      }
    }
  }

  if (inverse) {
    const double scale = 1.0 / static_cast<double>(n);
    for (auto& v : data) v *= scale;
  }
}

std::vector<Complex> fft_real(std::span<const double> x, std::size_t n_fft) {
  if (n_fft < x.size()) throw Error(Errc::InvalidArgument, "n_fft shorter than the signal");
  std::vector<Complex> buf(n_fft);
  for (std::size_t k = 0; k < x.size(); ++k) buf[k] = x[k];
  fft_inplace(buf);
  return buf;
}

}  // namespace vstkit
