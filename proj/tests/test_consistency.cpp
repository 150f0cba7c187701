#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "vstkit/consistency.hpp"
#include "vstkit/error.hpp"
#include "vstkit/rng.hpp"

using namespace vstkit;

namespace {

WaveformRecord tone(double amp, double f = 230.0) {
  SynthSpec s;
  s.freq = f;
  s.amplitude = amp;
  s.sample_rate = 2000.0;
  s.duration = 1.0;
  return synthesize(s);
}

ConsistencyReport with_cv(double cv, std::string label) {
  ConsistencyReport r;
  r.label = std::move(label);
  r.cv_peak_amplitude = cv;
  r.cv_rms = cv;
  r.peak_frequency_spread = 1.0;
  return r;
}

}  // namespace

TEST(Consistency, IdenticalTrials) {
  const std::vector<WaveformRecord> trials(3, tone(1.0));
  const auto r = consistency_report(trials, {});
  EXPECT_EQ(r.n_trials, 3);
  EXPECT_EQ(r.cv_peak_amplitude, 0.0);
  EXPECT_EQ(r.cv_rms, 0.0);
  EXPECT_EQ(r.peak_frequency_spread, 0.0);
}

TEST(Consistency, ThreeAmplitudes) {
  const std::vector<WaveformRecord> trials = {tone(0.8), tone(1.0), tone(1.2)};
  const auto r = consistency_report(trials, {}, "tones");
  EXPECT_NEAR(r.cv_peak_amplitude, 0.2, 0.2 * 0.02);
  EXPECT_NEAR(r.cv_rms, 0.2, 0.2 * 0.02);
  EXPECT_EQ(r.label, "tones");
  ASSERT_EQ(r.peak_amplitudes.size(), 3u);
  EXPECT_LT(r.peak_amplitudes[0], r.peak_amplitudes[1]);
  EXPECT_LT(r.peak_amplitudes[1], r.peak_amplitudes[2]);
}

TEST(Consistency, ForkVariesMoreThanPhone) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto fork = consistency_report(synthesize_corpus(Instrument::Fork, 10, seed), {}, "fork");
    const auto phone = consistency_report(synthesize_corpus(Instrument::Phone, 10, seed), {}, "phone");
    EXPECT_GT(fork.cv_peak_amplitude, phone.cv_peak_amplitude) << seed;
    const auto cmp = compare_instruments(fork, phone);
    EXPECT_EQ(cmp.verdict, Verdict::B);
    EXPECT_GT(cmp.ratio_cv_peak_amplitude, 1.0);
    for (double f : fork.peak_frequencies) EXPECT_NEAR(f, 178.0, 1.0);
    for (double f : phone.peak_frequencies) EXPECT_NEAR(f, 230.0, 1.0);
  }
}

TEST(Consistency, PermutationInvariant) {
  auto trials = synthesize_corpus(Instrument::Fork, 6, 9);
  const auto base = consistency_report_serial(trials, {});
  Rng rng(4);
  for (int k = 0; k < 10; ++k) {
    for (std::size_t i = trials.size() - 1; i > 0; --i) {
      std::swap(trials[i], trials[static_cast<std::size_t>(rng.next_u64() % (i + 1))]);
    }
    const auto r = consistency_report_serial(trials, {});
    EXPECT_EQ(r.cv_peak_amplitude, base.cv_peak_amplitude);
    EXPECT_EQ(r.cv_rms, base.cv_rms);
    EXPECT_EQ(r.peak_frequency_spread, base.peak_frequency_spread);
    EXPECT_EQ(r.mean_peak_amplitude, base.mean_peak_amplitude);
  }
}

TEST(Consistency, ParallelMatchesSerial) {
  const auto trials = synthesize_corpus(Instrument::Phone, 12, 2);
  const auto par = consistency_report(trials, {}, "p");
  const auto ser = consistency_report_serial(trials, {}, "p");
  EXPECT_EQ(par.peak_amplitudes, ser.peak_amplitudes);
  EXPECT_EQ(par.rms_values, ser.rms_values);
  EXPECT_EQ(par.peak_frequencies, ser.peak_frequencies);
  EXPECT_EQ(par.cv_peak_amplitude, ser.cv_peak_amplitude);
}

TEST(Consistency, Errors) {
  auto code = [](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::InvalidConfig;
  };
  const std::vector<WaveformRecord> one = {tone(1.0)};
  EXPECT_EQ(code([&] { consistency_report(one, {}); }), Errc::TooFewTrials);

  auto other_rate = tone(1.0);
  other_rate.sample_rate = 4000.0;
  const std::vector<WaveformRecord> mixed = {tone(1.0), other_rate};
  EXPECT_EQ(code([&] { consistency_report(mixed, {}); }), Errc::SampleRateMismatch);

  const std::vector<WaveformRecord> silent = {tone(0.0), tone(0.0)};
  EXPECT_EQ(code([&] { consistency_report(silent, {}); }), Errc::ZeroMeanAmplitude);
  EXPECT_EQ(code([&] { consistency_report_serial(silent, {}); }), Errc::ZeroMeanAmplitude);
}

TEST(Compare, RatioAndVerdict) {
  const auto s = compare_instruments(with_cv(0.3, "fork"), with_cv(0.05, "phone"));
  EXPECT_EQ(s.verdict, Verdict::B);
  EXPECT_NEAR(s.ratio_cv_peak_amplitude, 6.0, 1e-12);
  EXPECT_EQ(s.label_a, "fork");
  EXPECT_EQ(s.label_b, "phone");
  EXPECT_EQ(compare_instruments(with_cv(0.05, "x"), with_cv(0.3, "y")).verdict, Verdict::A);
}

TEST(Compare, EqualIsTie) {
  EXPECT_EQ(compare_instruments(with_cv(0.1, "a"), with_cv(0.1, "b")).verdict, Verdict::Tie);
  const auto z = compare_instruments(with_cv(0.0, "a"), with_cv(0.0, "b"));
  EXPECT_EQ(z.verdict, Verdict::Tie);
  EXPECT_TRUE(std::isnan(z.ratio_cv_peak_amplitude));
  EXPECT_TRUE(std::isinf(compare_instruments(with_cv(0.1, "a"), with_cv(0.0, "b")).ratio_cv_peak_amplitude));
  EXPECT_STREQ(to_string(Verdict::Tie), "tie");
}
