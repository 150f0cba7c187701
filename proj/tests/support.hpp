#pragma once

// Scripted participants shared by the unit, integration and acceptance
// suites. A script fixes, per trial, whether and when the button is pressed,
// so the same script can be driven through the bare engine, a logged session,
// the session manager, or the HTTP service.

#include <optional>
#include <vector>

#include "vstkit/rng.hpp"
#include "vstkit/session_store.hpp"
#include "vstkit/staircase.hpp"

namespace testing_support {

struct ScriptStep {
  std::optional<double> latency;  // press at onset + latency; none = no press
  bool spontaneous_before = false;  // extra press during the preceding ISI
};

using Script = std::vector<ScriptStep>;

// Time of the spontaneous press for a trial: halfway through the shortest
// possible ISI, so it always precedes the onset.
inline double spontaneous_time(const vstkit::StaircaseConfig& c, double last_event_time) {
  return last_event_time + 0.5 * c.isi_min;
}

inline const ScriptStep& step_for(const Script& s, std::size_t trial) { return s[trial % s.size()]; }

// Works for Staircase and RecordedSession.
template <typename Session>
void drive_script(Session& session, const Script& script, const vstkit::StaircaseConfig& config) {
  std::size_t trial = 0;
  while (!session.complete()) {
    const ScriptStep& step = step_for(script, trial);
    if (step.spontaneous_before) {
      double last = 0.0;
      if constexpr (std::is_same_v<Session, vstkit::Staircase>) {
        last = session.last_event_time();
      } else {
        last = session.engine().last_event_time();
      }
      session.press(spontaneous_time(config, last));
    }
    const vstkit::StimulusCommand cmd = session.next_stimulus();
    if (step.latency) {
      session.press(cmd.scheduled_onset + *step.latency);
    } else {
      session.timeout();
    }
    ++trial;
  }
}

inline vstkit::SessionResult run_script(const vstkit::StaircaseConfig& config, const Script& script) {
  vstkit::Staircase engine(config);
  drive_script(engine, script, config);
  return engine.threshold_estimate();
}

// Random script: mostly in-window presses and misses, with late presses,
// exact-deadline presses and spontaneous presses mixed in.
inline Script random_script(std::uint64_t seed, std::size_t length = 100) {
  vstkit::Rng rng(seed);
  Script s(length);
  for (auto& step : s) {
    const double u = rng.uniform();
    if (u < 0.45) {
      step.latency = rng.uniform(0.15, 1.4);
    } else if (u < 0.85) {
      step.latency.reset();
    } else if (u < 0.90) {
      step.latency = 1.5;
    } else {
      step.latency = rng.uniform(1.51, 2.9);
    }
    step.spontaneous_before = rng.uniform() < 0.1;
  }
  return s;
}

inline vstkit::StaircaseConfig random_config(std::uint64_t seed) {
  vstkit::Rng rng(seed);
  vstkit::StaircaseConfig c;
  c.rng_seed = rng.next_u64();
  const double grid[] = {0.3, 0.4, 0.5, 0.6, 0.7};
  c.start_intensity = grid[rng.next_u64() % 5];
  c.target_reversals = 2 + static_cast<int>(rng.next_u64() % 9);
  c.max_trials = c.target_reversals + static_cast<int>(rng.next_u64() % 60);
  return c;
}

}  // namespace testing_support
