#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "oracles/normal_series.hpp"
#include "vstkit/observer.hpp"

using namespace vstkit;

namespace {

ObserverModel ideal(double mu, double sigma) {
  ObserverModel m;
  m.mu = mu;
  m.sigma = sigma;
  m.guess_rate = 0.0;
  m.lapse_rate = 0.0;
  return m;
}

StimulusCommand stim(double intensity) {
  StimulusCommand c;
  c.intensity = intensity;
  c.duration = 0.1;
  c.sharpness = 1.0;
  c.scheduled_onset = 10.0;
  return c;
}

}  // namespace

TEST(NormalCdf, MatchesSeriesOracle) {
  for (double z = -6.0; z <= 6.0; z += 0.01) {
    EXPECT_NEAR(normal_cdf(z), oracle::normal_cdf_series(z), 1e-7) << z;
  }
  EXPECT_DOUBLE_EQ(normal_cdf(0.0), 0.5);
}

TEST(DetectionProbability, AtMuIsHalf) {
  EXPECT_DOUBLE_EQ(detection_probability(ideal(0.348, 0.05), 0.348), 0.5);
}

TEST(DetectionProbability, FarAboveMuApproachesOneMinusLapse) {
  ObserverModel m;
  EXPECT_NEAR(detection_probability(m, 1.0), 0.98, 1e-12);
  EXPECT_NEAR(detection_probability(m, 0.0), 0.02, 1e-12);
}

TEST(DetectionProbability, OneSigmaAbove) {
  const double p = detection_probability(ideal(0.348, 0.05), 0.398);
  EXPECT_NEAR(p, 0.841345, 1e-6);
  EXPECT_NEAR(p, oracle::normal_cdf_series((0.398 - 0.348) / 0.05), 1e-7);
}

TEST(DetectionProbability, DeterministicIsIndicator) {
  const auto m = ObserverModel::step_at(0.42);
  EXPECT_EQ(detection_probability(m, 0.42), 1.0);
  EXPECT_EQ(detection_probability(m, 0.45), 1.0);
  EXPECT_EQ(detection_probability(m, 0.40), 0.0);
  ObserverModel zero_sigma = ideal(0.3, 0.0);
  EXPECT_EQ(detection_probability(zero_sigma, 0.29), 0.0);
  EXPECT_EQ(detection_probability(zero_sigma, 0.30), 1.0);
}

TEST(DetectionProbability, MonotoneAndBounded) {
  Rng rng(99);
  for (int k = 0; k < 200; ++k) {
    ObserverModel m;
    m.mu = rng.uniform();
    m.sigma = rng.uniform(0.001, 0.3);
    m.guess_rate = rng.uniform(0.0, 0.3);
    m.lapse_rate = rng.uniform(0.0, 0.3);
    double prev = -1.0;
    for (int i = 0; i <= 100; ++i) {
      const double p = detection_probability(m, i / 100.0);
      EXPECT_GE(p, m.guess_rate - 1e-15);
      EXPECT_LE(p, 1.0 - m.lapse_rate + 1e-15);
      EXPECT_GE(p, prev);
      prev = p;
    }
  }
}

TEST(ObserverValidate, RejectsBadParameters) {
  auto expect_invalid = [](ObserverModel m) {
    try {
      validate(m);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::InvalidArgument);
    }
  };
  ObserverModel m;
  m.guess_rate = 0.5;
  expect_invalid(m);
  m = {};
  m.lapse_rate = -0.1;
  expect_invalid(m);
  m = {};
  m.sigma = -1.0;
  expect_invalid(m);
  m = {};
  m.latency_jitter = 0.5;
  expect_invalid(m);
  EXPECT_NO_THROW(validate(ObserverModel{}));
}

TEST(SimulateResponse, DeterministicAboveMuPresses) {
  const auto m = ObserverModel::step_at(0.42);
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const auto r = simulate_response(m, stim(0.45), rng);
    ASSERT_TRUE(std::holds_alternative<Press>(r));
    const double lat = std::get<Press>(r).time - 10.0;
    EXPECT_GE(lat, m.latency_mean - m.latency_jitter);
    EXPECT_LE(lat, m.latency_mean + m.latency_jitter);
  }
}

TEST(SimulateResponse, DeterministicBelowMuTimesOut) {
  const auto m = ObserverModel::step_at(0.42);
  Rng rng(1);
  EXPECT_TRUE(std::holds_alternative<Timeout>(simulate_response(m, stim(0.40), rng)));
}

TEST(SimulateResponse, FixedSeedReplays) {
  ObserverModel m;
  Rng a(5), b(5);
  for (int i = 0; i < 500; ++i) {
    const auto ra = simulate_response(m, stim(0.35), a);
    const auto rb = simulate_response(m, stim(0.35), b);
    ASSERT_EQ(ra.index(), rb.index());
    if (const auto* p = std::get_if<Press>(&ra)) EXPECT_EQ(p->time, std::get<Press>(rb).time);
  }
}

TEST(SimulateResponse, DetectionRateMatchesProbability) {
  const ObserverModel m = ideal(0.348, 0.05);
  Rng rng(2024);
  const int n = 40000;
  int hits = 0;
  for (int i = 0; i < n; ++i) hits += std::holds_alternative<Press>(simulate_response(m, stim(0.398), rng));
  const double p = 0.841345;
  EXPECT_NEAR(hits / static_cast<double>(n), p, 5 * std::sqrt(p * (1 - p) / n));
}

TEST(RunSimulatedSession, DeterministicObserverAlternates) {
  const auto r = run_simulated_session(StaircaseConfig{}, ObserverModel::step_at(0.42), 1);
  EXPECT_EQ(r.termination, Termination::ReversalsReached);
  EXPECT_NEAR(r.threshold_mean, 0.425, 1e-12);
  for (const auto& t : r.trials) {
    if (t.is_reversal) EXPECT_TRUE(std::abs(t.intensity - 0.40) < 1e-9 || std::abs(t.intensity - 0.45) < 1e-9);
  }
}

TEST(RunSimulatedSession, AlwaysDetectPinsAtZero) {
  const auto r = run_simulated_session(StaircaseConfig{}, ObserverModel::step_at(0.0), 3);
  EXPECT_EQ(r.termination, Termination::TrialCapHit);
  EXPECT_EQ(r.trials.size(), 100u);
  EXPECT_EQ(r.trials.back().intensity, 0.0);
  EXPECT_TRUE(r.reversal_indices.empty());
}

TEST(RunSimulatedSession, ValidationObserverSeed7) {
  const auto r = run_simulated_session(StaircaseConfig{}, ObserverModel::validation_default(), 7);
  ASSERT_TRUE(r.converged());
  EXPECT_NEAR(r.threshold_mean, 0.348, 0.05);
}

TEST(RunSimulatedSession, SeedOverridesConfig) {
  StaircaseConfig c;
  c.rng_seed = 12345;
  const auto a = run_simulated_session(c, ObserverModel{}, 9);
  c.rng_seed = 0;
  const auto b = run_simulated_session(c, ObserverModel{}, 9);
  EXPECT_EQ(a.trials, b.trials);
}

TEST(BatchPrecision, SameSeedIdentical) {
  const auto a = batch_precision(StaircaseConfig{}, ObserverModel{}, 10, 11);
  const auto b = batch_precision(StaircaseConfig{}, ObserverModel{}, 10, 11);
  EXPECT_EQ(a, b);
}

TEST(BatchPrecision, ParallelMatchesSerialBitwise) {
  for (std::uint64_t seed : {1ull, 2ull, 77ull}) {
    const auto par = batch_precision(StaircaseConfig{}, ObserverModel{}, 64, seed);
    const auto ser = batch_precision_serial(StaircaseConfig{}, ObserverModel{}, 64, seed);
    ASSERT_EQ(par.per_session_estimates.size(), ser.per_session_estimates.size());
    for (std::size_t i = 0; i < par.per_session_estimates.size(); ++i) {
      EXPECT_EQ(std::bit_cast<std::uint64_t>(par.per_session_estimates[i]),
                std::bit_cast<std::uint64_t>(ser.per_session_estimates[i]));
    }
    EXPECT_EQ(std::bit_cast<std::uint64_t>(par.mean), std::bit_cast<std::uint64_t>(ser.mean));
    EXPECT_EQ(std::bit_cast<std::uint64_t>(par.sample_sd), std::bit_cast<std::uint64_t>(ser.sample_sd));
  }
}

TEST(BatchPrecision, SessionIUsesSeedXorI) {
  const auto b = batch_precision_serial(StaircaseConfig{}, ObserverModel{}, 5, 40);
  for (int i = 0; i < 5; ++i) {
    const auto r = run_simulated_session(StaircaseConfig{}, ObserverModel{}, 40ull ^ static_cast<std::uint64_t>(i));
    EXPECT_EQ(b.per_session_estimates[static_cast<std::size_t>(i)], r.threshold_mean);
  }
}

TEST(BatchPrecision, ValidationObserverSdBelowStep) {
  const auto b = batch_precision(StaircaseConfig{}, ObserverModel::validation_default(), 10, 1);
  EXPECT_LT(b.sample_sd, 0.05);
}

TEST(BatchPrecision, DeterministicObserverWithinOneStep) {
  for (double mu : {0.213, 0.348, 0.377, 0.61}) {
    const auto b = batch_precision(StaircaseConfig{}, ObserverModel::step_at(mu), 20, 3);
    EXPECT_LE(b.sample_sd, 0.05);
    for (double e : b.per_session_estimates) EXPECT_LE(std::abs(e - mu), 0.05) << mu;
  }
}

TEST(BatchStats, RecomputeMatches) {
  const auto b = batch_precision(StaircaseConfig{}, ObserverModel{}, 30, 8);
  const auto& v = b.per_session_estimates;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  EXPECT_NEAR(b.mean, mean, 1e-12);
  EXPECT_NEAR(b.sample_sd, std::sqrt(ss / (v.size() - 1)), 1e-12);
}
