#pragma once

// Butterworth band-pass filters as cascaded second-order sections.
//
// Design path: analog low-pass prototype of order order/2, low-pass to
// band-pass transform around the pre-warped edges, bilinear transform.
// Each section carries one zero at z = +1, one at z = -1 and a pole pair,
// so the numerator of every section is g (1 - z^-2).
//
// bandpass_filter applies the cascade forward and then backward. The result
// has zero phase and the squared magnitude of a single pass: the effective
// order doubles.

#include <complex>
#include <span>
#include <vector>

#include "vstkit/waveform.hpp"

namespace vstkit {

struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;  // a0 == 1
};

struct SosFilter {
  std::vector<Biquad> sections;
  double sample_rate = 0.0;
  double low = 0.0;   // Hz
  double high = 0.0;  // Hz
  int order = 0;      // total band-pass order, 2 * sections

  // Single-pass complex response at `freq_hz`.
  std::complex<double> response(double freq_hz) const;
  std::vector<std::complex<double>> poles() const;
  bool stable() const;
};

// order in {2, 4, 6, 8}; 0 < low < high < sample_rate / 2.
// Throws BadBand, InvalidArgument (order) or UnstableDesign.
SosFilter design_butterworth_bandpass(double low, double high, int order, double sample_rate);

// One causal pass, transposed direct form II per section, zero initial state.
std::vector<double> sosfilt(const SosFilter& filter, std::span<const double> x);

// Forward-backward pass over an odd-extended copy of x.
std::vector<double> filtfilt(const SosFilter& filter, std::span<const double> x);

WaveformRecord bandpass_filter(const WaveformRecord& w, double low, double high, int order);

}  // namespace vstkit
