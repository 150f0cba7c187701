#include "vstkit/observer.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "vstkit/parallel.hpp"

namespace vstkit {

void validate(const ObserverModel& m) {
  auto fail = [](const std::string& what) { throw Error(Errc::InvalidArgument, "observer " + what); };
  if (!std::isfinite(m.mu) || m.mu < 0.0 || m.mu > 1.0) fail("mu must lie in [0, 1]");
  if (!std::isfinite(m.sigma) || m.sigma < 0.0) fail("sigma must be >= 0");
  if (!(m.guess_rate >= 0.0 && m.guess_rate < 0.5)) fail("guess rate must lie in [0, 0.5)");
  if (!(m.lapse_rate >= 0.0 && m.lapse_rate < 0.5)) fail("lapse rate must lie in [0, 0.5)");
  if (!(m.latency_jitter >= 0.0)) fail("latency jitter must be >= 0");
  if (!(m.latency_mean - m.latency_jitter > 0.0)) fail("latency mean must exceed jitter");
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double detection_probability(const ObserverModel& m, double intensity) {
  if (m.is_deterministic()) return intensity >= m.mu ? 1.0 : 0.0;
  const double phi = normal_cdf((intensity - m.mu) / m.sigma);
  return m.guess_rate + (1.0 - m.guess_rate - m.lapse_rate) * phi;
}

TrialResponse simulate_response(const ObserverModel& m, const StimulusCommand& stimulus, Rng& rng) {
  bool detected;
  if (m.is_deterministic()) {
    detected = stimulus.intensity >= m.mu;
  } else {
    detected = rng.uniform() < detection_probability(m, stimulus.intensity);
  }
  if (!detected) return Timeout{};
  const double latency = rng.uniform(m.latency_mean - m.latency_jitter,
                                     m.latency_mean + m.latency_jitter);
  return Press{stimulus.scheduled_onset + latency};
}

SessionResult run_simulated_session(StaircaseConfig config, const ObserverModel& observer,
                                    std::uint64_t seed) {
  validate(observer);
  config.rng_seed = seed;
  Staircase engine(config);
  Rng rng(mix_seed(seed));
  drive_session(engine, observer, rng);
  return engine.threshold_estimate();
}

BatchStats batch_stats(std::vector<double> estimates) {
  BatchStats s;
  s.per_session_estimates = std::move(estimates);
  const auto n = s.per_session_estimates.size();
  double sum = 0.0;
  for (double v : s.per_session_estimates) sum += v;
  s.mean = n > 0 ? sum / static_cast<double>(n) : std::nan("");
  if (n > 1) {
    double ss = 0.0;
    for (double v : s.per_session_estimates) ss += (v - s.mean) * (v - s.mean);
    s.sample_sd = std::sqrt(ss / static_cast<double>(n - 1));
  } else {
    s.sample_sd = std::nan("");
  }
  return s;
}

namespace {

void check_batch(const StaircaseConfig& config, const ObserverModel& observer, int n) {
  if (n < 2) throw Error(Errc::InvalidArgument, "batch needs at least 2 sessions");
  if (auto issues = validate(config); !issues.empty()) throw ConfigError(std::move(issues));
  validate(observer);
}

}  // namespace

BatchStats batch_precision_serial(const StaircaseConfig& config, const ObserverModel& observer,
                                  int n_sessions, std::uint64_t seed) {
  check_batch(config, observer, n_sessions);
  std::vector<double> estimates(static_cast<std::size_t>(n_sessions));
  for (int i = 0; i < n_sessions; ++i) {
    estimates[static_cast<std::size_t>(i)] =
        run_simulated_session(config, observer, seed ^ static_cast<std::uint64_t>(i)).threshold_mean;
  }
  return batch_stats(std::move(estimates));
}

BatchStats batch_precision(const StaircaseConfig& config, const ObserverModel& observer,
                           int n_sessions, std::uint64_t seed) {
  check_batch(config, observer, n_sessions);
  std::vector<double> estimates(static_cast<std::size_t>(n_sessions));
  VSTKIT_PARALLEL_FOR
  for (int i = 0; i < n_sessions; ++i) {
    estimates[static_cast<std::size_t>(i)] =
        run_simulated_session(config, observer, seed ^ static_cast<std::uint64_t>(i)).threshold_mean;
  }
  return batch_stats(std::move(estimates));
}

}  // namespace vstkit
