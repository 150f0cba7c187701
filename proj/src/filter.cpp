#include "vstkit/filter.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "vstkit/error.hpp"

namespace vstkit {

namespace {

using C = std::complex<double>;

// Section denominator 1 + a1 z^-1 + a2 z^-2 from two digital poles.
Biquad section_from_poles(C p1, C p2) {
  Biquad s;
  s.b0 = 1.0;
  s.b1 = 0.0;
  s.b2 = -1.0;
  s.a1 = -(p1 + p2).real();
  s.a2 = (p1 * p2).real();
  return s;
}

C bilinear(C s, double fs) { return (2.0 * fs + s) / (2.0 * fs - s); }

C section_response(const Biquad& s, C z) {
  const C zi = 1.0 / z;
  return (s.b0 + zi * (s.b1 + zi * s.b2)) / (1.0 + zi * (s.a1 + zi * s.a2));
}

}  // namespace

std::complex<double> SosFilter::response(double freq_hz) const {
  const C z = std::polar(1.0, 2.0 * std::numbers::pi * freq_hz / sample_rate);
  C h = 1.0;
  for (const auto& s : sections) h *= section_response(s, z);
  return h;
}

std::vector<std::complex<double>> SosFilter::poles() const {
  std::vector<C> out;
  for (const auto& s : sections) {
    const C disc = std::sqrt(C(s.a1 * s.a1 - 4.0 * s.a2));
    out.push_back((-s.a1 + disc) / 2.0);
    out.push_back((-s.a1 - disc) / 2.0);
  }
  return out;
}

bool SosFilter::stable() const {
  const auto p = poles();
  return std::all_of(p.begin(), p.end(), [](C z) { return std::abs(z) < 1.0; });
}

SosFilter design_butterworth_bandpass(double low, double high, int order, double fs) {
  if (order != 2 && order != 4 && order != 6 && order != 8) {
    throw Error(Errc::InvalidArgument, "band-pass order must be 2, 4, 6 or 8");
  }
  const double nyquist = fs / 2.0;
  if (!(fs > 0.0) || !(low > 0.0) || !(low < high) || !(high < nyquist)) {
    throw Error(Errc::BadBand, "need 0 < low < high < Nyquist, got [" + std::to_string(low) + ", " +
                                   std::to_string(high) + "] Hz at " + std::to_string(fs) + " Hz");
  }

  const int n = order / 2;
  // Pre-warped analog edges.
  const double wl = 2.0 * fs * std::tan(std::numbers::pi * low / fs);
  const double wh = 2.0 * fs * std::tan(std::numbers::pi * high / fs);
  const double bw = wh - wl;
  const double w0sq = wl * wh;

  auto bandpass_poles = [&](C p) {
    const C pb = p * bw;
    const C disc = std::sqrt(pb * pb - 4.0 * w0sq);
    return std::pair<C, C>{(pb + disc) / 2.0, (pb - disc) / 2.0};
  };

  SosFilter f;
  f.sample_rate = fs;
  f.low = low;
  f.high = high;
  f.order = order;
  for (int k = 0; k < n; ++k) {
    const C p = std::polar(1.0, std::numbers::pi * (2.0 * k + n + 1) / (2.0 * n));
    if (p.imag() > 1e-12) {
      // p and conj(p) map to two conjugate pairs: one section per pair.
      const auto [s1, s2] = bandpass_poles(p);
      const C z1 = bilinear(s1, fs);
      const C z2 = bilinear(s2, fs);
      f.sections.push_back(section_from_poles(z1, std::conj(z1)));
      f.sections.push_back(section_from_poles(z2, std::conj(z2)));
    } else if (std::abs(p.imag()) <= 1e-12) {
      // Real prototype pole (odd n): its two band-pass poles are either a
      // conjugate pair or both real.
      const auto [s1, s2] = bandpass_poles(C(p.real(), 0.0));
      f.sections.push_back(section_from_poles(bilinear(s1, fs), bilinear(s2, fs)));
    }
  }

  // Unit gain at the digital centre frequency, spread evenly over sections.
  const double center = fs / std::numbers::pi * std::atan(std::sqrt(w0sq) / (2.0 * fs));
  const double gain = 1.0 / std::abs(f.response(center));
  const double per_section = std::pow(gain, 1.0 / static_cast<double>(f.sections.size()));
  for (auto& s : f.sections) {
    s.b0 *= per_section;
    s.b1 *= per_section;
    s.b2 *= per_section;
  }

  if (!f.stable()) throw Error(Errc::UnstableDesign, "a section pole lies on or outside the unit circle");
  return f;
}

std::vector<double> sosfilt(const SosFilter& filter, std::span<const double> x) {
  std::vector<double> y(x.begin(), x.end());
  for (const auto& s : filter.sections) {
    double z1 = 0.0, z2 = 0.0;
    for (double& v : y) {
      const double in = v;
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      v = out;
    }
  }
  return y;
}

std::vector<double> filtfilt(const SosFilter& filter, std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 2) return sosfilt(filter, x);
  // Odd extension long enough to cover about three periods of the low edge.
  const auto edge = static_cast<std::size_t>(std::ceil(3.0 * filter.sample_rate / filter.low));
  const std::size_t pad = std::min(n - 1, std::max<std::size_t>(3 * (2 * filter.sections.size() + 1), edge));

  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

  std::vector<double> y = sosfilt(filter, ext);
  std::reverse(y.begin(), y.end());
  y = sosfilt(filter, y);
  std::reverse(y.begin(), y.end());
  return {y.begin() + static_cast<std::ptrdiff_t>(pad), y.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

WaveformRecord bandpass_filter(const WaveformRecord& w, double low, double high, int order) {
  if (w.channel_count() != 1) throw Error(Errc::BadChannel, "expected a single-channel record");
  const SosFilter f = design_butterworth_bandpass(low, high, order, w.sample_rate);
  WaveformRecord out = w;
  out.channels.front() = filtfilt(f, w.channels.front());
  return out;
}

}  // namespace vstkit
