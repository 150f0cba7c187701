#include "vstkit/consistency.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>

#include "vstkit/error.hpp"
#include "vstkit/parallel.hpp"

namespace vstkit {

namespace {

struct Moments {
  double mean = 0.0;
  double sd = 0.0;
};

Moments sorted_moments(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  double sum = 0.0;
  for (double x : v) sum += x;
  Moments m;
  m.mean = sum / static_cast<double>(v.size());
  // shifted by the smallest value: identical trials give an SD of exactly 0
  double s1 = 0.0, s2 = 0.0;
  for (double x : v) {
    s1 += x - v.front();
    s2 += (x - v.front()) * (x - v.front());
  }
  const double n = static_cast<double>(v.size());
  m.sd = std::sqrt(std::max(0.0, s2 - s1 * s1 / n) / (n - 1.0));
  return m;
}

void check_trials(std::span<const WaveformRecord> trials) {
  if (trials.size() < 2) throw Error(Errc::TooFewTrials, "consistency needs at least 2 trials");
  for (const auto& t : trials) {
    if (t.sample_rate != trials.front().sample_rate) {
      throw Error(Errc::SampleRateMismatch, "trial '" + t.label + "' has a different sample rate");
    }
  }
}

ConsistencyReport assemble(std::vector<TrialAnalysis> analyses, std::string label) {
  ConsistencyReport r;
  r.label = std::move(label);
  r.n_trials = static_cast<int>(analyses.size());
  for (const auto& a : analyses) {
    r.peak_amplitudes.push_back(a.spectrum.peak_amplitude);
    r.rms_values.push_back(a.rms);
    r.peak_frequencies.push_back(a.spectrum.peak_frequency);
  }
  const Moments amp = sorted_moments(r.peak_amplitudes);
  const Moments rms = sorted_moments(r.rms_values);
  const Moments freq = sorted_moments(r.peak_frequencies);
  if (!(amp.mean > 0.0)) throw Error(Errc::ZeroMeanAmplitude, "mean peak amplitude is zero");
  if (!(rms.mean > 0.0)) throw Error(Errc::ZeroMeanAmplitude, "mean RMS is zero");
  r.mean_peak_amplitude = amp.mean;
  r.mean_rms = rms.mean;
  r.mean_peak_frequency = freq.mean;
  r.cv_peak_amplitude = amp.sd / amp.mean;
  r.cv_rms = rms.sd / rms.mean;
  const auto [lo, hi] = std::minmax_element(r.peak_frequencies.begin(), r.peak_frequencies.end());
  r.peak_frequency_spread = *hi - *lo;
  return r;
}

}  // namespace

ConsistencyReport consistency_report_serial(std::span<const WaveformRecord> trials,
                                            const PipelineParams& params, std::string label) {
  check_trials(trials);
  std::vector<TrialAnalysis> analyses;
  analyses.reserve(trials.size());
  for (const auto& t : trials) analyses.push_back(analyze(t, params));
  return assemble(std::move(analyses), std::move(label));
}

ConsistencyReport consistency_report(std::span<const WaveformRecord> trials,
                                     const PipelineParams& params, std::string label) {
  check_trials(trials);
  const auto n = static_cast<long>(trials.size());
  std::vector<TrialAnalysis> analyses(trials.size());
  std::vector<std::exception_ptr> errors(trials.size());
  VSTKIT_PARALLEL_FOR
  for (long i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      analyses[k] = analyze(trials[k], params);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return assemble(std::move(analyses), std::move(label));
}

namespace {

double ratio(double a, double b) {
  if (b == 0.0) return a == 0.0 ? std::nan("") : std::numeric_limits<double>::infinity();
  return a / b;
}

}  // namespace

ComparisonSummary compare_instruments(const ConsistencyReport& a, const ConsistencyReport& b) {
  ComparisonSummary s;
  s.label_a = a.label;
  s.label_b = b.label;
  s.ratio_cv_peak_amplitude = ratio(a.cv_peak_amplitude, b.cv_peak_amplitude);
  s.ratio_cv_rms = ratio(a.cv_rms, b.cv_rms);
  s.ratio_peak_frequency_spread = ratio(a.peak_frequency_spread, b.peak_frequency_spread);
  constexpr double kTie = 1e-12;
  if (std::abs(a.cv_peak_amplitude - b.cv_peak_amplitude) <= kTie) {
    s.verdict = Verdict::Tie;
  } else {
    s.verdict = a.cv_peak_amplitude < b.cv_peak_amplitude ? Verdict::A : Verdict::B;
  }
  return s;
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::A: return "a";
    case Verdict::B: return "b";
    case Verdict::Tie: return "tie";
  }
  return "tie";
}

}  // namespace vstkit
