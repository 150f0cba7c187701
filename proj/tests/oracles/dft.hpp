#pragma once

// O(N^2) DFT straight from the definition; reference for the radix-2 FFT.

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

namespace oracle {

inline std::vector<std::complex<long double>> naive_dft(const std::vector<std::complex<double>>& x) {
  const std::size_t n = x.size();
  std::vector<std::complex<long double>> out(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::complex<long double> acc = 0.0L;
    for (std::size_t k = 0; k < n; ++k) {
      // Reduce j*k mod n first so the angle stays small and exact.
      const auto m = static_cast<long double>((j * k) % n);
      const long double angle = -2.0L * std::numbers::pi_v<long double> * m / static_cast<long double>(n);
      acc += std::complex<long double>(x[k].real(), x[k].imag()) *
             std::complex<long double>(std::cos(angle), std::sin(angle));
    }
    out[j] = acc;
  }
  return out;
}

}  // namespace oracle
