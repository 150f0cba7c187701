#include "vstkit/staircase.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

namespace vstkit {

namespace {

// Grid points closer than this to a bound snap onto it.
constexpr double kGridSnap = 1e-9;

bool same_double(double a, double b) {
  return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b) ||
         (std::isnan(a) && std::isnan(b));
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

const char* to_string(Direction d) { return d == Direction::Up ? "up" : "down"; }

const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::Detected: return "detected";
    case Outcome::Missed: return "missed";
    case Outcome::LateResponse: return "late_response";
  }
  return "unknown";
}

const char* to_string(Termination t) {
  return t == Termination::ReversalsReached ? "reversals_reached" : "trial_cap_hit";
}

std::vector<ConfigIssue> validate(const StaircaseConfig& c) {
  std::vector<ConfigIssue> issues;
  auto require = [&](bool ok, const char* field, const char* message) {
    if (!ok) issues.push_back({field, message});
  };
  const double fields[] = {c.start_intensity, c.step_size,   c.intensity_min,
                           c.intensity_max,   c.stimulus_duration, c.stimulus_sharpness,
                           c.response_deadline, c.late_window, c.isi_min, c.isi_max};
  if (!std::all_of(std::begin(fields), std::end(fields), [](double v) { return std::isfinite(v); })) {
    issues.push_back({"config", "must contain only finite numbers"});
    return issues;
  }
  require(c.intensity_min >= 0.0, "intensity_min", "must be >= 0");
  require(c.intensity_max <= 1.0, "intensity_max", "must be <= 1");
  require(c.intensity_min < c.intensity_max, "intensity_max", "must exceed intensity_min");
  require(c.start_intensity >= c.intensity_min && c.start_intensity <= c.intensity_max,
          "start_intensity", "must lie within [intensity_min, intensity_max]");
  require(c.step_size > 0.0, "step_size", "must be > 0");
  require(c.step_size <= c.intensity_max - c.intensity_min, "step_size",
          "must not exceed intensity_max - intensity_min");
  require(c.target_reversals >= 2, "target_reversals", "must be >= 2");
  require(c.max_trials >= c.target_reversals, "max_trials", "must be >= target_reversals");
  require(c.stimulus_duration > 0.0, "stimulus_duration", "must be > 0");
  require(c.response_deadline > 0.0, "response_deadline", "must be > 0");
  require(c.late_window >= 0.0, "late_window", "must be >= 0");
  require(c.isi_min > 0.0, "isi_min", "must be > 0");
  require(c.isi_min <= c.isi_max, "isi_max", "must be >= isi_min");
  return issues;
}

Staircase::Staircase(StaircaseConfig config) : config_(config), rng_(config.rng_seed) {
  if (auto issues = validate(config_); !issues.empty()) throw ConfigError(std::move(issues));
  const double span_lo = (config_.intensity_min - config_.start_intensity) / config_.step_size;
  const double span_hi = (config_.intensity_max - config_.start_intensity) / config_.step_size;
  level_lo_ = static_cast<int>(std::ceil(span_lo - kGridSnap));
  level_hi_ = static_cast<int>(std::floor(span_hi + kGridSnap));
}

double Staircase::intensity_at(int level) const {
  const double v = config_.start_intensity + level * config_.step_size;
  if (std::abs(v - config_.intensity_min) <= kGridSnap) return config_.intensity_min;
  if (std::abs(v - config_.intensity_max) <= kGridSnap) return config_.intensity_max;
  return std::clamp(v, config_.intensity_min, config_.intensity_max);
}

double Staircase::current_intensity() const { return intensity_at(level_); }

void Staircase::check_time(double time) const {
  if (!(time >= last_event_time_)) {
    throw Error(Errc::TimeWentBackwards,
                "event at " + fmt(time) + " s precedes " + fmt(last_event_time_) + " s");
  }
}

StimulusCommand Staircase::next_stimulus() {
  if (complete()) throw Error(Errc::SessionComplete, "no further stimuli");
  if (pending_) return *pending_;
  StimulusCommand cmd;
  cmd.trial_index = static_cast<int>(trials_.size());
  cmd.intensity = current_intensity();
  cmd.duration = config_.stimulus_duration;
  cmd.sharpness = config_.stimulus_sharpness;
  cmd.scheduled_onset = last_event_time_ + rng_.uniform(config_.isi_min, config_.isi_max);
  pending_ = cmd;
  return cmd;
}

double Staircase::window_close() const {
  if (!pending_) throw Error(Errc::NoPendingStimulus, "no stimulus pending");
  return pending_->scheduled_onset + config_.response_deadline + config_.late_window;
}

TrialRecord Staircase::resolve_trial(const TrialResponse& response) {
  if (complete()) throw Error(Errc::SessionComplete, "session already complete");
  if (!pending_) throw Error(Errc::NoPendingStimulus, "no stimulus pending");
  const StimulusCommand& cmd = *pending_;
  const double close = window_close();

  TrialRecord rec;
  rec.trial_index = cmd.trial_index;
  rec.intensity = cmd.intensity;
  rec.onset_time = cmd.scheduled_onset;

  if (const auto* p = std::get_if<Press>(&response)) {
    check_time(p->time);
    if (p->time < cmd.scheduled_onset) {
      throw Error(Errc::NoPendingStimulus, "press at " + fmt(p->time) + " s precedes onset");
    }
    if (p->time > close) {
      throw Error(Errc::WindowClosed, "press at " + fmt(p->time) + " s after window close");
    }
    rec.response_latency = p->time - cmd.scheduled_onset;
    // Compared in the time domain so a press at exactly onset + deadline is a
    // detection regardless of rounding in the latency subtraction.
    rec.outcome = p->time <= cmd.scheduled_onset + config_.response_deadline
                      ? Outcome::Detected
                      : Outcome::LateResponse;
    rec.resolved_at = p->time;
  } else {
    rec.outcome = Outcome::Missed;
    rec.resolved_at = close;
  }

  rec.intended_direction_after = rec.outcome == Outcome::Detected ? Direction::Down : Direction::Up;
  rec.is_reversal = !trials_.empty() && rec.intended_direction_after != last_direction_;
  last_direction_ = rec.intended_direction_after;
  level_ = rec.intended_direction_after == Direction::Down ? std::max(level_ - 1, level_lo_)
                                                           : std::min(level_ + 1, level_hi_);
  if (rec.outcome == Outcome::LateResponse) ++late_count_;
  if (rec.is_reversal) reversals_.push_back(rec.trial_index);
  last_event_time_ = rec.resolved_at;
  trials_.push_back(rec);
  pending_.reset();

  if (reversal_count() >= config_.target_reversals) {
    termination_ = Termination::ReversalsReached;
  } else if (static_cast<int>(trials_.size()) >= config_.max_trials) {
    termination_ = Termination::TrialCapHit;
  }
  return rec;
}

PressOutcome Staircase::press(double time) {
  if (complete()) throw Error(Errc::SessionComplete, "session already complete");
  check_time(time);
  if (pending_ && time >= pending_->scheduled_onset) return resolve_trial(Press{time});
  ++spontaneous_count_;
  return SpontaneousPress{time, false_positive_count()};
}

std::optional<TrialRecord> Staircase::expire(double now) {
  if (complete() || !pending_) return std::nullopt;
  if (now < window_close()) return std::nullopt;
  return timeout();
}

SessionResult Staircase::threshold_estimate() const {
  if (!complete()) throw Error(Errc::SessionNotComplete, "session still running");
  return summarize(config_, trials_, spontaneous_count_, *termination_);
}

SessionResult summarize(const StaircaseConfig& config, std::vector<TrialRecord> trials,
                        int spontaneous_presses, Termination termination) {
  SessionResult r;
  r.config = config;
  r.trials = std::move(trials);
  r.spontaneous_press_count = spontaneous_presses;
  r.termination = termination;
  double sum = 0.0;
  for (const auto& t : r.trials) {
    if (t.is_reversal) {
      r.reversal_indices.push_back(t.trial_index);
      sum += t.intensity;
    }
    if (t.outcome == Outcome::LateResponse) ++r.late_response_count;
  }
  r.false_positive_count = r.late_response_count + spontaneous_presses;

  const auto n = r.reversal_indices.size();
  r.threshold_mean = n > 0 ? sum / static_cast<double>(n) : std::nan("");
  if (n > 1) {
    // shifted by the first value so a flat run gives exactly zero
    const double x0 = r.trials[static_cast<std::size_t>(r.reversal_indices.front())].intensity;
    double s1 = 0.0, s2 = 0.0;
    for (int idx : r.reversal_indices) {
      const double d = r.trials[static_cast<std::size_t>(idx)].intensity - x0;
      s1 += d;
      s2 += d * d;
    }
    const double ss = std::max(0.0, s2 - s1 * s1 / static_cast<double>(n));
    r.threshold_sd = std::sqrt(ss / static_cast<double>(n - 1));
  } else {
    r.threshold_sd = std::nan("");
  }
  return r;
}

bool operator==(const SessionResult& a, const SessionResult& b) { return diff(a, b).empty(); }

std::vector<std::string> diff(const SessionResult& e, const SessionResult& a) {
  std::vector<std::string> out;
  auto num = [&](const std::string& name, double x, double y) {
    if (!same_double(x, y)) out.push_back(name + ": expected " + fmt(x) + ", got " + fmt(y));
  };
  auto integer = [&](const std::string& name, long long x, long long y) {
    if (x != y) {
      out.push_back(name + ": expected " + std::to_string(x) + ", got " + std::to_string(y));
    }
  };
  auto text = [&](const std::string& name, const std::string& x, const std::string& y) {
    if (x != y) out.push_back(name + ": expected " + x + ", got " + y);
  };

  if (!(e.config == a.config)) out.push_back("config: differs");
  integer("trials.size", static_cast<long long>(e.trials.size()),
          static_cast<long long>(a.trials.size()));
  const auto n = std::min(e.trials.size(), a.trials.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto& x = e.trials[i];
    const auto& y = a.trials[i];
    const std::string p = "trials[" + std::to_string(i) + "].";
    integer(p + "trial_index", x.trial_index, y.trial_index);
    num(p + "intensity", x.intensity, y.intensity);
    num(p + "onset_time", x.onset_time, y.onset_time);
    if (x.response_latency.has_value() != y.response_latency.has_value()) {
      out.push_back(p + "response_latency: presence differs");
    } else if (x.response_latency) {
      num(p + "response_latency", *x.response_latency, *y.response_latency);
    }
    text(p + "outcome", to_string(x.outcome), to_string(y.outcome));
    text(p + "intended_direction_after", to_string(x.intended_direction_after),
         to_string(y.intended_direction_after));
    integer(p + "is_reversal", x.is_reversal, y.is_reversal);
    num(p + "resolved_at", x.resolved_at, y.resolved_at);
  }
  if (e.reversal_indices != a.reversal_indices) out.push_back("reversal_indices: differ");
  num("threshold_mean", e.threshold_mean, a.threshold_mean);
  num("threshold_sd", e.threshold_sd, a.threshold_sd);
  integer("false_positive_count", e.false_positive_count, a.false_positive_count);
  integer("late_response_count", e.late_response_count, a.late_response_count);
  integer("spontaneous_press_count", e.spontaneous_press_count, a.spontaneous_press_count);
  text("termination", to_string(e.termination), to_string(a.termination));
  return out;
}

}  // namespace vstkit
