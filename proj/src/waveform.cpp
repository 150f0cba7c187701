#include "vstkit/waveform.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <string_view>

#include "vstkit/error.hpp"
#include "vstkit/rng.hpp"

namespace vstkit {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_number(std::string_view field, std::size_t line_no) {
  double v = 0.0;
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(v)) {
    throw Error(Errc::MalformedCsv,
                "line " + std::to_string(line_no) + ": bad number '" + std::string(field) + "'");
  }
  return v;
}

std::string shortest(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

WaveformRecord load_waveform(std::istream& in, std::string label) {
  std::vector<double> times;
  WaveformRecord w;
  w.label = std::move(label);
  std::string raw;
  std::size_t line_no = 0;
  std::size_t n_cols = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split_commas(line);
    if (n_cols == 0) {
      const bool single = fields.size() == 2 && fields[0] == "t" && fields[1] == "ax";
      const bool triple = fields.size() == 4 && fields[0] == "t" && fields[1] == "ax" &&
                          fields[2] == "ay" && fields[3] == "az";
      if (!single && !triple) {
        throw Error(Errc::MalformedCsv, "line " + std::to_string(line_no) +
                                            ": expected header 't,ax' or 't,ax,ay,az'");
      }
      n_cols = fields.size();
      w.channels.resize(n_cols - 1);
      continue;
    }
    if (fields.size() != n_cols) {
      throw Error(Errc::MalformedCsv, "line " + std::to_string(line_no) + ": expected " +
                                          std::to_string(n_cols) + " fields, got " +
                                          std::to_string(fields.size()));
    }
    times.push_back(parse_number(fields[0], line_no));
    for (std::size_t c = 1; c < n_cols; ++c) w.channels[c - 1].push_back(parse_number(fields[c], line_no));
  }
  if (n_cols == 0) throw Error(Errc::MalformedCsv, "missing header");
  if (times.size() < kMinSamples) {
    throw Error(Errc::TooShort, std::to_string(times.size()) + " samples, need at least " +
                                    std::to_string(kMinSamples));
  }

  std::vector<double> dt(times.size() - 1);
  for (std::size_t i = 0; i + 1 < times.size(); ++i) dt[i] = times[i + 1] - times[i];
  std::vector<double> sorted = dt;
  const auto mid = sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2);
  std::nth_element(sorted.begin(), mid, sorted.end());
  double median = *mid;
  if (sorted.size() % 2 == 0) {
    median = 0.5 * (median + *std::max_element(sorted.begin(), mid));
  }
  if (!(median > 0.0)) throw Error(Errc::NonUniformSampling, "timestamps are not increasing");
  double worst = 0.0;
  for (double d : dt) worst = std::max(worst, std::abs(d - median) / median);
  if (!(worst < 0.01)) {
    throw Error(Errc::NonUniformSampling,
                "sample spacing deviates from the median by " + shortest(worst * 100.0) + "%");
  }
  w.sample_rate = 1.0 / median;
  return w;
}

WaveformRecord load_waveform_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::InvalidArgument, "cannot open " + path.string());
  return load_waveform(in, path.stem().string());
}

void write_waveform_csv(std::ostream& out, const WaveformRecord& w) {
  out << (w.channel_count() == 3 ? "t,ax,ay,az\n" : "t,ax\n");
  for (std::size_t k = 0; k < w.size(); ++k) {
    out << shortest(static_cast<double>(k) / w.sample_rate);
    for (const auto& ch : w.channels) out << ',' << shortest(ch[k]);
    out << '\n';
  }
}

WaveformRecord synthesize(const SynthSpec& spec) {
  if (!(spec.sample_rate > 0.0) || !(spec.duration > 0.0)) {
    throw Error(Errc::InvalidArgument, "sample rate and duration must be positive");
  }
  if (spec.kind != SynthKind::WhiteNoise && !(spec.freq < spec.sample_rate / 2.0)) {
    throw Error(Errc::AliasedFrequency, shortest(spec.freq) + " Hz is at or above Nyquist (" +
                                            shortest(spec.sample_rate / 2.0) + " Hz)");
  }
  const auto n = static_cast<std::size_t>(std::llround(spec.duration * spec.sample_rate));
  Rng rng(spec.seed);
  std::vector<double> x(n);
  const double omega = 2.0 * std::numbers::pi * spec.freq;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) / spec.sample_rate;
    double v = 0.0;
    switch (spec.kind) {
      case SynthKind::Sine: v = spec.amplitude * std::sin(omega * t); break;
      case SynthKind::DecayingSine:
        v = spec.amplitude * std::exp(-t / spec.decay_tau) * std::sin(omega * t);
        break;
      case SynthKind::WhiteNoise: v = spec.amplitude * rng.normal(); break;
    }
    if (spec.noise_sd > 0.0) v += spec.noise_sd * rng.normal();
    x[k] = v;
  }
  WaveformRecord w;
  w.sample_rate = spec.sample_rate;
  w.channels.push_back(std::move(x));
  w.label = spec.label;
  return w;
}

std::vector<WaveformRecord> synthesize_corpus(Instrument instrument, int n_trials,
                                              std::uint64_t seed) {
  Rng rng(seed);
  std::vector<WaveformRecord> out;
  for (int i = 0; i < n_trials; ++i) {
    SynthSpec s;
    s.sample_rate = 2000.0;
    s.duration = 2.0;
    s.noise_sd = 0.01;
    s.seed = mix_seed(seed + static_cast<std::uint64_t>(i) + 1);
    if (instrument == Instrument::Fork) {
      s.kind = SynthKind::DecayingSine;
      s.freq = 178.0;
      s.decay_tau = 0.5;
      s.amplitude = rng.uniform(0.5, 1.5);
      s.label = "fork_" + std::to_string(i);
    } else {
      s.kind = SynthKind::Sine;
      s.freq = 230.0;
      s.amplitude = rng.uniform(0.95, 1.05);
      s.label = "phone_" + std::to_string(i);
    }
    out.push_back(synthesize(s));
  }
  return out;
}

WaveformRecord select_channel(const WaveformRecord& w, ChannelSelect select) {
  WaveformRecord out;
  out.sample_rate = w.sample_rate;
  out.label = w.label;
  if (select.mode == ChannelSelect::Mode::Axis) {
    if (select.axis < 0 || static_cast<std::size_t>(select.axis) >= w.channel_count()) {
      throw Error(Errc::BadChannel, "axis " + std::to_string(select.axis) + " of a " +
                                        std::to_string(w.channel_count()) + "-channel record");
    }
    out.channels.push_back(w.channels[static_cast<std::size_t>(select.axis)]);
    return out;
  }
  if (w.channel_count() != 3) throw Error(Errc::BadChannel, "magnitude needs 3 channels");
  std::vector<double> mag(w.size());
  for (std::size_t k = 0; k < mag.size(); ++k) {
    mag[k] = std::hypot(w.channels[0][k], w.channels[1][k], w.channels[2][k]);
  }
  out.channels.push_back(std::move(mag));
  return out;
}

namespace {

const std::vector<double>& single(const WaveformRecord& w) {
  if (w.channel_count() != 1) throw Error(Errc::BadChannel, "expected a single-channel record");
  return w.channels.front();
}

}  // namespace

WaveformRecord detrend(const WaveformRecord& w) {
  const auto& x = single(w);
  WaveformRecord out = w;
  if (x.empty()) return out;
  double sum = 0.0;
  for (double v : x) sum += v;
  const double mean = sum / static_cast<double>(x.size());
  for (double& v : out.channels.front()) v -= mean;
  return out;
}

double rms_amplitude(const WaveformRecord& w) {
  const auto& x = single(w);
  if (x.empty()) return 0.0;
  double ss = 0.0;
  for (double v : x) ss += v * v;
  return std::sqrt(ss / static_cast<double>(x.size()));
}

}  // namespace vstkit
