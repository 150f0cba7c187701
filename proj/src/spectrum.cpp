#include "vstkit/spectrum.hpp"

#include <charconv>
#include <cmath>
#include <numbers>

#include "vstkit/error.hpp"
#include "vstkit/fft.hpp"
#include "vstkit/filter.hpp"

namespace vstkit {

const char* to_string(Window w) { return w == Window::Hann ? "hann" : "rectangular"; }

Window parse_window(const std::string& name) {
  if (name == "hann") return Window::Hann;
  if (name == "rect" || name == "rectangular") return Window::Rectangular;
  throw Error(Errc::InvalidArgument, "unknown window '" + name + "'");
}

std::vector<double> window_coefficients(Window window, std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (window == Window::Hann && n > 1) {
    for (std::size_t k = 0; k < n; ++k) {
      w[k] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(k) /
                                   static_cast<double>(n - 1)));
    }
  }
  return w;
}

SpectrumResult power_spectrum(const WaveformRecord& w, Window window, std::size_t n_fft) {
  if (w.channel_count() != 1) throw Error(Errc::BadChannel, "expected a single-channel record");
  const auto& x = w.channels.front();
  if (x.empty()) throw Error(Errc::EmptySignal, "no samples");
  if (n_fft == 0) n_fft = next_power_of_two(4 * x.size());
  if (!is_power_of_two(n_fft) || n_fft < x.size()) {
    throw Error(Errc::InvalidArgument, "n_fft must be a power of two >= the signal length");
  }

  const auto coeffs = window_coefficients(window, x.size());
  double coherent = 0.0;
  std::vector<double> windowed(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    windowed[k] = x[k] * coeffs[k];
    coherent += coeffs[k];
  }
  const auto spectrum = fft_real(windowed, n_fft);

  SpectrumResult s;
  s.sample_rate = w.sample_rate;
  s.n_fft = n_fft;
  s.resolution = w.sample_rate / static_cast<double>(n_fft);
  s.window = window;
  const std::size_t bins = n_fft / 2 + 1;
  s.frequencies.resize(bins);
  s.amplitudes.resize(bins);
  for (std::size_t j = 0; j < bins; ++j) {
    const bool edge = j == 0 || j == n_fft / 2;
    s.frequencies[j] = static_cast<double>(j) * s.resolution;
    s.amplitudes[j] = std::abs(spectrum[j]) * (edge ? 1.0 : 2.0) / coherent;
  }
  s.peak_frequency = std::nan("");
  s.peak_amplitude = std::nan("");
  return s;
}

Peak peak_frequency(const SpectrumResult& s, double low, double high, bool interpolate) {
  std::size_t best = 0;
  bool found = false;
  for (std::size_t j = 0; j < s.frequencies.size(); ++j) {
    const double f = s.frequencies[j];
    if (f < low || f > high) continue;
    // amplitudes within a relative 1e-9 count as a tie and keep the lower bin
    if (!found || s.amplitudes[j] > s.amplitudes[best] * (1.0 + 1e-9)) {
      best = j;
      found = true;
    }
  }
  if (!found) {
    throw Error(Errc::EmptyBand, "no spectrum bins in [" + std::to_string(low) + ", " +
                                     std::to_string(high) + "] Hz");
  }
  Peak p{s.frequencies[best], s.amplitudes[best], best};
  if (interpolate && best > 0 && best + 1 < s.amplitudes.size()) {
    const double a = s.amplitudes[best - 1];
    const double b = s.amplitudes[best];
    const double c = s.amplitudes[best + 1];
    const double denom = a - 2.0 * b + c;
    if (denom < 0.0) {
      const double delta = 0.5 * (a - c) / denom;
      p.frequency = (static_cast<double>(best) + delta) * s.resolution;
    }
  }
  return p;
}

TrialAnalysis analyze(const WaveformRecord& w, const PipelineParams& params) {
  const WaveformRecord ch = select_channel(w, params.channel);
  const double nyquist = ch.sample_rate / 2.0;
  if (!(params.band_low < nyquist)) {
    throw Error(Errc::EmptyBand, "band starts at or above Nyquist (" + std::to_string(nyquist) + " Hz)");
  }
  const WaveformRecord filtered =
      bandpass_filter(detrend(ch), params.band_low, params.band_high, params.order);
  TrialAnalysis out;
  out.rms = rms_amplitude(filtered);
  out.spectrum = power_spectrum(filtered, params.window);
  const Peak p = peak_frequency(out.spectrum, params.band_low, params.band_high, params.interpolate);
  out.spectrum.peak_frequency = p.frequency;
  out.spectrum.peak_amplitude = p.amplitude;
  return out;
}

std::string spectrum_csv(const SpectrumResult& s) {
  std::string out = "freq_hz,amplitude_g\n";
  char buf[64];
  for (std::size_t j = 0; j < s.frequencies.size(); ++j) {
    auto r = std::to_chars(buf, buf + sizeof buf, s.frequencies[j]);
    out.append(buf, r.ptr);
    out += ',';
    r = std::to_chars(buf, buf + sizeof buf, s.amplitudes[j]);
    out.append(buf, r.ptr);
    out += '\n';
  }
  return out;
}

}  // namespace vstkit
