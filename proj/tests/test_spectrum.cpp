#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "vstkit/error.hpp"
#include "vstkit/fft.hpp"
#include "vstkit/rng.hpp"
#include "vstkit/spectrum.hpp"

using namespace vstkit;

namespace {

WaveformRecord sine(double f, double fs, std::size_t n, double amp = 1.0) {
  WaveformRecord w;
  w.sample_rate = fs;
  w.channels.assign(1, std::vector<double>(n));
  for (std::size_t k = 0; k < n; ++k) w.channels[0][k] = amp * std::sin(2 * std::numbers::pi * f * k / fs);
  return w;
}

}  // namespace

TEST(Window, HannIsSymmetricAndZeroAtEnds) {
  const auto w = window_coefficients(Window::Hann, 9);
  EXPECT_NEAR(w.front(), 0.0, 1e-15);
  EXPECT_NEAR(w.back(), 0.0, 1e-15);
  EXPECT_NEAR(w[4], 1.0, 1e-15);
  for (std::size_t i = 0; i < 9; ++i) EXPECT_NEAR(w[i], w[8 - i], 1e-15);
  for (double v : window_coefficients(Window::Rectangular, 5)) EXPECT_EQ(v, 1.0);
}

TEST(Window, Parse) {
  EXPECT_EQ(parse_window("hann"), Window::Hann);
  EXPECT_EQ(parse_window("rect"), Window::Rectangular);
  EXPECT_EQ(parse_window("rectangular"), Window::Rectangular);
  EXPECT_THROW(parse_window("kaiser"), Error);
}

TEST(PowerSpectrum, BinAlignedToneReadsItsAmplitude) {
  const double fs = 1000.0;
  const std::size_t n = 1024;
  const double f = 102.0 * fs / n;  // bin 102, about 99.6 Hz
  const auto s = power_spectrum(sine(f, fs, n), Window::Rectangular, n);
  EXPECT_EQ(s.frequencies.size(), n / 2 + 1);
  EXPECT_EQ(s.amplitudes.size(), n / 2 + 1);
  EXPECT_DOUBLE_EQ(s.resolution, fs / n);
  EXPECT_NEAR(s.amplitudes[102], 1.0, 0.01);
  const auto p = peak_frequency(s, 50.0, 400.0, false);
  EXPECT_EQ(p.bin, 102u);
  EXPECT_NEAR(p.frequency, f, 1e-9);
}

TEST(PowerSpectrum, HannBinAlignedToneReadsItsAmplitude) {
  const std::size_t n = 1024;
  const auto s = power_spectrum(sine(64.0 * 2000.0 / n, 2000.0, n, 0.7), Window::Hann, n);
  EXPECT_NEAR(s.amplitudes[64], 0.7, 0.01);
}

TEST(PowerSpectrum, ZerosGiveZeros) {
  WaveformRecord w;
  w.sample_rate = 500.0;
  w.channels.assign(1, std::vector<double>(100, 0.0));
  for (double a : power_spectrum(w, Window::Hann).amplitudes) EXPECT_EQ(a, 0.0);
}

TEST(PowerSpectrum, EmptySignal) {
  WaveformRecord w;
  w.sample_rate = 500.0;
  w.channels.assign(1, {});
  try {
    power_spectrum(w, Window::Hann);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::EmptySignal);
  }
}

TEST(PowerSpectrum, AutoLengthIsFourTimesPadded) {
  const auto s = power_spectrum(sine(50.0, 1000.0, 1000), Window::Hann);
  EXPECT_EQ(s.n_fft, 4096u);
}

TEST(PowerSpectrum, OneSidedFoldMatchesFullTransform) {
  // Energy in the one-sided amplitudes equals that of the full rectangular transform.
  Rng rng(12);
  WaveformRecord w;
  w.sample_rate = 800.0;
  w.channels.assign(1, std::vector<double>(256));
  for (auto& v : w.channels[0]) v = rng.normal();
  const auto s = power_spectrum(w, Window::Rectangular, 256);
  const auto X = fft_real(w.samples(), 256);
  for (std::size_t j = 0; j <= 128; ++j) {
    const double scale = (j == 0 || j == 128) ? 1.0 / 256 : 2.0 / 256;
    EXPECT_NEAR(s.amplitudes[j], std::abs(X[j]) * scale, 1e-12);
  }
}

TEST(PeakFrequency, TieGoesLow) {
  SpectrumResult s;
  s.sample_rate = 1000.0;
  s.n_fft = 16;
  s.resolution = 62.5;
  for (std::size_t j = 0; j <= 8; ++j) {
    s.frequencies.push_back(j * 62.5);
    s.amplitudes.push_back(0.0);
  }
  s.amplitudes[2] = 1.0;  // 125 Hz
  s.amplitudes[4] = 1.0;  // 250 Hz
  const auto p = peak_frequency(s, 50.0, 400.0, false);
  EXPECT_EQ(p.bin, 2u);
  EXPECT_DOUBLE_EQ(p.frequency, 125.0);
}

TEST(PeakFrequency, EqualTonesPickLower) {
  // 1 Hz bins, both tones bin-aligned: amplitudes agree to rounding
  auto w = sine(100.0, 1024.0, 1024);
  const auto b = sine(200.0, 1024.0, 1024);
  for (std::size_t k = 0; k < w.size(); ++k) w.channels[0][k] += b.samples()[k];
  const auto s = power_spectrum(w, Window::Rectangular, 1024);
  EXPECT_NEAR(s.amplitudes[100], s.amplitudes[200], 1e-12);
  const auto p = peak_frequency(s, 50.0, 400.0, true);
  EXPECT_NEAR(p.frequency, 100.0, 1e-6);
}

TEST(PeakFrequency, BandAboveNyquistIsEmpty) {
  const auto s = power_spectrum(sine(100.0, 1000.0, 500), Window::Hann);
  try {
    peak_frequency(s, 600.0, 700.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::EmptyBand);
  }
}

TEST(PeakFrequency, AmplitudeIsTheBinValue) {
  const auto s = power_spectrum(sine(123.4, 1000.0, 900), Window::Hann);
  const auto p = peak_frequency(s, 50.0, 400.0, true);
  EXPECT_EQ(p.amplitude, s.amplitudes[p.bin]);
}

TEST(PeakFrequency, GridOfTonesAndRates) {
  for (double fs : {1000.0, 2000.0, 4410.0}) {
    for (double f = 60.0; f < std::min(480.0, 0.45 * fs); f += 37.3) {
      const auto s = power_spectrum(sine(f, fs, static_cast<std::size_t>(fs)), Window::Hann);
      const auto raw = peak_frequency(s, 50.0, 490.0, false);
      const auto fine = peak_frequency(s, 50.0, 490.0, true);
      EXPECT_LE(std::abs(raw.frequency - f), s.resolution / 2 + 1e-9) << fs << " " << f;
      EXPECT_LE(std::abs(fine.frequency - f), std::abs(raw.frequency - f) + 1e-9);
    }
  }
}

TEST(Analyze, ForkAndPhonePeaks) {
  const auto fork = synthesize_corpus(Instrument::Fork, 3, 5);
  const auto phone = synthesize_corpus(Instrument::Phone, 3, 5);
  for (const auto& w : fork) EXPECT_NEAR(analyze(w, {}).spectrum.peak_frequency, 178.0, 1.0);
  for (const auto& w : phone) {
    const auto a = analyze(w, {});
    EXPECT_NEAR(a.spectrum.peak_frequency, 230.0, a.spectrum.resolution);
    const auto p = peak_frequency(a.spectrum, 50.0, 500.0, true);
    EXPECT_EQ(a.spectrum.peak_amplitude, a.spectrum.amplitudes[p.bin]);
  }
}

TEST(Analyze, BandAboveNyquistFailsBeforeFiltering) {
  PipelineParams p;
  p.band_low = 600.0;
  p.band_high = 700.0;
  try {
    analyze(sine(100.0, 1000.0, 500), p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::EmptyBand);
  }
}

TEST(SpectrumCsv, HeaderAndRows) {
  const auto s = power_spectrum(sine(100.0, 1000.0, 64), Window::Hann, 64);
  const auto csv = spectrum_csv(s);
  EXPECT_EQ(csv.rfind("freq_hz,amplitude_g\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 34);
}
