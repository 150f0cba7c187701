#pragma once

// Cross-trial dispersion of an instrument's vibration: how much peak
// amplitude, RMS and peak frequency vary between repeated trials.

#include <span>
#include <string>
#include <vector>

#include "vstkit/spectrum.hpp"

namespace vstkit {

struct ConsistencyReport {
  std::string label;
  int n_trials = 0;
  // Per trial, in input order.
  std::vector<double> peak_amplitudes;
  std::vector<double> rms_values;
  std::vector<double> peak_frequencies;
  double mean_peak_amplitude = 0.0;
  double mean_rms = 0.0;
  double mean_peak_frequency = 0.0;
  double cv_peak_amplitude = 0.0;  // sample SD / mean
  double cv_rms = 0.0;
  double peak_frequency_spread = 0.0;  // max - min, Hz
};

// Needs >= 2 trials at one sample rate. Scalar statistics are computed over
// sorted copies, so they do not depend on trial order. The parallel version
// analyzes trials concurrently with OpenMP; the serial version is the
// reference it is tested against.
ConsistencyReport consistency_report(std::span<const WaveformRecord> trials,
                                     const PipelineParams& params, std::string label = {});
ConsistencyReport consistency_report_serial(std::span<const WaveformRecord> trials,
                                            const PipelineParams& params, std::string label = {});

enum class Verdict { A, B, Tie };

struct ComparisonSummary {
  std::string label_a;
  std::string label_b;
  // a / b; NaN when undefined (0 / 0), +inf when only b is 0.
  double ratio_cv_peak_amplitude = 0.0;
  double ratio_cv_rms = 0.0;
  double ratio_peak_frequency_spread = 0.0;
  Verdict verdict = Verdict::Tie;  // which has the lower cv_peak_amplitude
};

ComparisonSummary compare_instruments(const ConsistencyReport& a, const ConsistencyReport& b);

const char* to_string(Verdict v);

}  // namespace vstkit
