#pragma once

// One-sided amplitude spectra and the standard analysis pipeline
// (channel -> detrend -> band-pass -> windowed FFT -> peak).
//
// Amplitude normalization: |X[j]| * 2 / sum(window) for interior bins and
// |X[j]| / sum(window) for DC and Nyquist, so a pure tone of amplitude A on a
// bin centre reads A in g.

#include <cstddef>
#include <string>
#include <vector>

#include "vstkit/waveform.hpp"

namespace vstkit {

enum class Window { Rectangular, Hann };

const char* to_string(Window w);
Window parse_window(const std::string& name);  // "rect"/"rectangular"/"hann"

std::vector<double> window_coefficients(Window window, std::size_t n);

struct SpectrumResult {
  double sample_rate = 0.0;
  std::size_t n_fft = 0;
  double resolution = 0.0;  // Hz per bin
  Window window = Window::Hann;
  std::vector<double> frequencies;  // n_fft / 2 + 1 bins, 0..Nyquist
  std::vector<double> amplitudes;   // g
  // Filled by analyze() / annotate_peak(); NaN until then.
  double peak_frequency = 0.0;
  double peak_amplitude = 0.0;
};

// n_fft == 0 selects the next power of two >= 4x the signal length.
SpectrumResult power_spectrum(const WaveformRecord& w, Window window, std::size_t n_fft = 0);

struct Peak {
  double frequency = 0.0;
  double amplitude = 0.0;  // amplitude of the argmax bin
  std::size_t bin = 0;
};

// Argmax of the amplitude over bins inside [low, high]; ties go to the lower
// frequency. With `interpolate`, the frequency is refined by a parabola
// through the peak bin and its two neighbours. Throws EmptyBand.
Peak peak_frequency(const SpectrumResult& s, double low, double high, bool interpolate = true);

struct PipelineParams {
  double band_low = 50.0;
  double band_high = 500.0;
  int order = 4;
  Window window = Window::Hann;
  bool interpolate = true;
  ChannelSelect channel = ChannelSelect::Axis(0);
};

struct TrialAnalysis {
  SpectrumResult spectrum;  // peak fields populated
  double rms = 0.0;         // of the filtered signal
};

// Throws EmptyBand before filtering when the band starts at or above Nyquist.
TrialAnalysis analyze(const WaveformRecord& w, const PipelineParams& params);

// Two-column `freq_hz,amplitude_g` CSV.
std::string spectrum_csv(const SpectrumResult& s);

}  // namespace vstkit
