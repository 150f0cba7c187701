#pragma once

// Simulated participants: a cumulative-Gaussian psychometric function with
// guess and lapse rates, plus a uniform response-latency model.
//
//   p(I) = guess + (1 - guess - lapse) * Phi((I - mu) / sigma)
//
// A deterministic observer (or sigma == 0) detects exactly when I >= mu.

#include <cstdint>
#include <vector>

#include "vstkit/rng.hpp"
#include "vstkit/staircase.hpp"

namespace vstkit {

struct ObserverModel {
  double mu = 0.348;
  double sigma = 0.02;
  double guess_rate = 0.02;
  double lapse_rate = 0.02;
  double latency_mean = 0.5;    // s
  double latency_jitter = 0.2;  // s, half-width of the uniform latency draw
  bool deterministic = false;

  bool is_deterministic() const { return deterministic || sigma == 0.0; }

  // Observer behind the 10-session precision check.
  static ObserverModel validation_default() { return {}; }
  static ObserverModel step_at(double mu) {
    ObserverModel m;
    m.mu = mu;
    m.sigma = 0.0;
    m.guess_rate = 0.0;
    m.lapse_rate = 0.0;
    m.deterministic = true;
    return m;
  }
};

// Throws Error(InvalidArgument) naming the violated invariant.
void validate(const ObserverModel& observer);

// Standard normal CDF, 0.5 * erfc(-z / sqrt 2); accurate to ~1e-16.
double normal_cdf(double z);

double detection_probability(const ObserverModel& observer, double intensity);

TrialResponse simulate_response(const ObserverModel& observer, const StimulusCommand& stimulus,
                                Rng& rng);

// Runs a session to completion under simulated time. Works with any session
// type exposing complete(), next_stimulus(), press(t) and timeout(), so the
// same loop drives the bare engine and a logged session.
template <typename Session>
void drive_session(Session& session, const ObserverModel& observer, Rng& rng) {
  while (!session.complete()) {
    const StimulusCommand cmd = session.next_stimulus();
    const TrialResponse response = simulate_response(observer, cmd, rng);
    if (const auto* p = std::get_if<Press>(&response)) {
      session.press(p->time);
    } else {
      session.timeout();
    }
  }
}

// The engine is seeded with `seed` (overriding config.rng_seed) and the
// observer with mix_seed(seed).
SessionResult run_simulated_session(StaircaseConfig config, const ObserverModel& observer,
                                    std::uint64_t seed);

struct BatchStats {
  std::vector<double> per_session_estimates;
  double mean = 0.0;
  double sample_sd = 0.0;

  bool operator==(const BatchStats&) const = default;
};

// Session i runs with seed ^ i. Estimates are ordered by session index.
// batch_precision parallelizes across sessions with OpenMP;
// batch_precision_serial is the reference loop it is tested against.
BatchStats batch_precision(const StaircaseConfig& config, const ObserverModel& observer,
                           int n_sessions, std::uint64_t seed);
BatchStats batch_precision_serial(const StaircaseConfig& config, const ObserverModel& observer,
                                  int n_sessions, std::uint64_t seed);

// Mean and sample SD (n - 1) in index order.
BatchStats batch_stats(std::vector<double> estimates);

}  // namespace vstkit
