#pragma once

// Simple 1-up/1-down staircase for absolute vibrotactile intensity thresholds.
//
// The engine never reads a clock. Every time it sees is supplied by the
// caller in seconds since session start: simulated time in tests and
// simulation, wall-clock time in the live service.
//
// Trial timeline:
//   previous resolution --ISI--> onset --deadline--> --late window--> close
// A press inside [onset, onset + deadline] is a detection. A press after the
// deadline but before close is a late response: counted as a false positive
// and treated as a miss by the staircase. No press by close is a miss. A press
// with no open window (during the ISI) is a spontaneous false positive and
// leaves the staircase untouched.

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "vstkit/error.hpp"
#include "vstkit/rng.hpp"

namespace vstkit {

enum class Direction { Up, Down };
enum class Outcome { Detected, Missed, LateResponse };
enum class Termination { ReversalsReached, TrialCapHit };

const char* to_string(Direction d);
const char* to_string(Outcome o);
const char* to_string(Termination t);

struct StaircaseConfig {
  double start_intensity = 0.5;
  double step_size = 0.05;
  int target_reversals = 8;
  double intensity_min = 0.0;
  double intensity_max = 1.0;
  double stimulus_duration = 0.1;   // s
  double stimulus_sharpness = 1.0;  // recorded, never varied
  double response_deadline = 1.5;   // s
  double late_window = 1.5;          // s after the deadline a press is still attributed
  double isi_min = 2.0;              // s
  double isi_max = 4.0;              // s
  int max_trials = 100;
  std::uint64_t rng_seed = 0;

  bool operator==(const StaircaseConfig&) const = default;
};

// Empty when the config is usable.
std::vector<ConfigIssue> validate(const StaircaseConfig& config);

struct StimulusCommand {
  int trial_index = 0;
  double intensity = 0.0;
  double duration = 0.0;
  double sharpness = 0.0;
  double scheduled_onset = 0.0;

  bool operator==(const StimulusCommand&) const = default;
};

struct TrialRecord {
  int trial_index = 0;
  double intensity = 0.0;
  double onset_time = 0.0;
  std::optional<double> response_latency;
  Outcome outcome = Outcome::Missed;
  Direction intended_direction_after = Direction::Up;
  bool is_reversal = false;
  // Press time, or the window close time for a timeout.
  double resolved_at = 0.0;

  bool operator==(const TrialRecord&) const = default;
};

struct SessionResult {
  StaircaseConfig config;
  std::vector<TrialRecord> trials;
  std::vector<int> reversal_indices;
  // NaN when fewer than one (mean) or two (SD) reversals were observed.
  double threshold_mean = 0.0;
  double threshold_sd = 0.0;  // sample SD, n - 1
  int false_positive_count = 0;
  int late_response_count = 0;
  int spontaneous_press_count = 0;
  Termination termination = Termination::ReversalsReached;

  bool converged() const { return termination == Termination::ReversalsReached; }
};

// Field-wise equality; NaN compares equal to NaN.
bool operator==(const SessionResult& a, const SessionResult& b);

// Human-readable list of differing fields, empty when equal.
std::vector<std::string> diff(const SessionResult& expected, const SessionResult& actual);

struct Press {
  double time = 0.0;
};
struct Timeout {};
using TrialResponse = std::variant<Press, Timeout>;

struct SpontaneousPress {
  double time = 0.0;
  int false_positive_count = 0;
};
using PressOutcome = std::variant<TrialRecord, SpontaneousPress>;

class Staircase {
 public:
  // Throws ConfigError listing every violated invariant.
  explicit Staircase(StaircaseConfig config);

  const StaircaseConfig& config() const noexcept { return config_; }
  bool complete() const noexcept { return termination_.has_value(); }
  const std::optional<StimulusCommand>& pending() const noexcept { return pending_; }
  const std::vector<TrialRecord>& trials() const noexcept { return trials_; }
  int reversal_count() const noexcept { return static_cast<int>(reversals_.size()); }
  int false_positive_count() const noexcept { return late_count_ + spontaneous_count_; }
  double last_event_time() const noexcept { return last_event_time_; }
  double current_intensity() const;

  // Schedules the next stimulus (one ISI draw) or returns the one already
  // pending. Throws SessionComplete.
  StimulusCommand next_stimulus();

  // Close of the pending response window. Throws NoPendingStimulus.
  double window_close() const;

  // Resolves the pending trial. A Press must fall inside [onset, close];
  // a Timeout resolves at the close time.
  TrialRecord resolve_trial(const TrialResponse& response);
  TrialRecord timeout() { return resolve_trial(Timeout{}); }

  // Routes a button press: resolves the pending trial when its window is
  // open, otherwise records a spontaneous false positive.
  PressOutcome press(double time);

  // Resolves the pending trial as a timeout once `now` has reached its close.
  std::optional<TrialRecord> expire(double now);

  // Throws SessionNotComplete.
  SessionResult threshold_estimate() const;

 private:
  double intensity_at(int level) const;
  void check_time(double time) const;

  StaircaseConfig config_;
  Rng rng_;
  int level_ = 0;
  int level_lo_ = 0;
  int level_hi_ = 0;
  Direction last_direction_ = Direction::Down;
  std::optional<StimulusCommand> pending_;
  std::vector<TrialRecord> trials_;
  std::vector<int> reversals_;
  int late_count_ = 0;
  int spontaneous_count_ = 0;
  double last_event_time_ = 0.0;
  std::optional<Termination> termination_;
};

// Builds a SessionResult from a trial log. Used by the engine and by
// independent recomputation in tests and tools.
SessionResult summarize(const StaircaseConfig& config, std::vector<TrialRecord> trials,
                        int spontaneous_presses, Termination termination);

}  // namespace vstkit
