#pragma once

// Uniformly sampled acceleration records: CSV ingestion, synthetic tones,
// channel selection and simple time-domain summaries.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace vstkit {

struct WaveformRecord {
  double sample_rate = 0.0;                   // Hz
  std::vector<std::vector<double>> channels;  // g; 1 channel or x/y/z
  std::string label;

  std::size_t channel_count() const { return channels.size(); }
  std::size_t size() const { return channels.empty() ? 0 : channels.front().size(); }
  const std::vector<double>& samples(std::size_t channel = 0) const { return channels.at(channel); }
};

inline constexpr std::size_t kMinSamples = 16;

// Reads `t,ax[,ay,az]` CSV (seconds, g). Lines starting with '#' and blank
// lines are skipped. The sample rate is 1 / median(dt); every dt must lie
// within 1% of the median.
WaveformRecord load_waveform(std::istream& in, std::string label = {});
WaveformRecord load_waveform_file(const std::filesystem::path& path);

// Writes the same CSV layout load_waveform reads, t = k / sample_rate.
void write_waveform_csv(std::ostream& out, const WaveformRecord& w);

enum class SynthKind { Sine, DecayingSine, WhiteNoise };

struct SynthSpec {
  SynthKind kind = SynthKind::Sine;
  double freq = 100.0;       // Hz
  double amplitude = 1.0;    // g; standard deviation for WhiteNoise
  double decay_tau = std::numeric_limits<double>::infinity();  // s
  double duration = 1.0;     // s
  double sample_rate = 1000.0;
  double noise_sd = 0.0;     // additive Gaussian noise, g
  std::uint64_t seed = 0;
  std::string label;
};

// Sine:         A sin(2 pi f t) + noise
// DecayingSine: A exp(-t / tau) sin(2 pi f t) + noise
// WhiteNoise:   A N(0, 1) + noise
WaveformRecord synthesize(const SynthSpec& spec);

enum class Instrument { Fork, Phone };

// Synthetic trial sets standing in for the accelerometer recordings:
//   Fork:  decaying 178 Hz tone, tau 0.5 s, amplitude ~ U[0.5, 1.5]
//   Phone: constant 230 Hz tone, amplitude ~ U[0.95, 1.05]
// Both 2 s at 2 kHz with 0.01 g of additive noise.
std::vector<WaveformRecord> synthesize_corpus(Instrument instrument, int n_trials,
                                              std::uint64_t seed);

struct ChannelSelect {
  enum class Mode { Axis, Magnitude };
  Mode mode = Mode::Axis;
  int axis = 0;

  static ChannelSelect Axis(int i) { return {Mode::Axis, i}; }
  static ChannelSelect Magnitude() { return {Mode::Magnitude, 0}; }
};

WaveformRecord select_channel(const WaveformRecord& w, ChannelSelect select);

// Removes the mean (gravity / DC offset) of a single-channel record.
WaveformRecord detrend(const WaveformRecord& w);

double rms_amplitude(const WaveformRecord& w);

}  // namespace vstkit
