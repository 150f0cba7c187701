#include "vstkit/json_io.hpp"

#include <cmath>
#include <set>

namespace vstkit {

namespace {

Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json numbers(const std::vector<double>& v) {
  Json arr = Json::array();
  for (double x : v) arr.push_back(finite_or_null(x));
  return arr;
}

Outcome outcome_from(const std::string& s) {
  if (s == "detected") return Outcome::Detected;
  if (s == "missed") return Outcome::Missed;
  if (s == "late_response") return Outcome::LateResponse;
  throw Error(Errc::InvalidArgument, "unknown outcome '" + s + "'");
}

Direction direction_from(const std::string& s) {
  if (s == "up") return Direction::Up;
  if (s == "down") return Direction::Down;
  throw Error(Errc::InvalidArgument, "unknown direction '" + s + "'");
}

Termination termination_from(const std::string& s) {
  if (s == "reversals_reached") return Termination::ReversalsReached;
  if (s == "trial_cap_hit") return Termination::TrialCapHit;
  throw Error(Errc::InvalidArgument, "unknown termination '" + s + "'");
}

}  // namespace

double number_or_nan(const Json& j) {
  if (j.is_null()) return std::nan("");
  return j.get<double>();
}

Json to_json(const StaircaseConfig& c) {
  return Json{{"start_intensity", c.start_intensity},
              {"step_size", c.step_size},
              {"target_reversals", c.target_reversals},
              {"intensity_min", c.intensity_min},
              {"intensity_max", c.intensity_max},
              {"stimulus_duration", c.stimulus_duration},
              {"stimulus_sharpness", c.stimulus_sharpness},
              {"response_deadline", c.response_deadline},
              {"late_window", c.late_window},
              {"isi_min", c.isi_min},
              {"isi_max", c.isi_max},
              {"max_trials", c.max_trials},
              {"rng_seed", c.rng_seed}};
}

StaircaseConfig config_from_json(const Json& j, StaircaseConfig c) {
  std::vector<ConfigIssue> issues;
  if (!j.is_object()) throw ConfigError(std::vector<ConfigIssue>{{"config", "must be a JSON object"}});
  auto number = [&](const char* key, double& dst) {
    if (!j.contains(key)) return;
    if (!j[key].is_number()) {
      issues.push_back({key, "must be a number"});
      return;
    }
    dst = j[key].get<double>();
  };
  auto integer = [&](const char* key, int& dst) {
    if (!j.contains(key)) return;
    if (!j[key].is_number_integer()) {
      issues.push_back({key, "must be an integer"});
      return;
    }
    dst = j[key].get<int>();
  };
  number("start_intensity", c.start_intensity);
  number("step_size", c.step_size);
  integer("target_reversals", c.target_reversals);
  number("intensity_min", c.intensity_min);
  number("intensity_max", c.intensity_max);
  number("stimulus_duration", c.stimulus_duration);
  number("stimulus_sharpness", c.stimulus_sharpness);
  number("response_deadline", c.response_deadline);
  number("late_window", c.late_window);
  number("isi_min", c.isi_min);
  number("isi_max", c.isi_max);
  integer("max_trials", c.max_trials);
  if (j.contains("rng_seed")) {
    const Json& seed = j["rng_seed"];
    if (seed.is_number_unsigned()) {
      c.rng_seed = seed.get<std::uint64_t>();
    } else if (seed.is_number_integer() && seed.get<std::int64_t>() >= 0) {
      c.rng_seed = static_cast<std::uint64_t>(seed.get<std::int64_t>());
    } else {
      issues.push_back({"rng_seed", "must be a non-negative integer"});
    }
  }
  static const std::set<std::string> known = {
      "start_intensity", "step_size", "target_reversals", "intensity_min", "intensity_max",
      "stimulus_duration", "stimulus_sharpness", "response_deadline", "late_window",
      "isi_min", "isi_max", "max_trials", "rng_seed"};
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) issues.push_back({key, "is not a config field"});
  }
  if (issues.empty()) issues = validate(c);
  if (!issues.empty()) throw ConfigError(std::move(issues));
  return c;
}

Json to_json(const StimulusCommand& s) {
  return Json{{"trial_index", s.trial_index},
              {"intensity", s.intensity},
              {"duration", s.duration},
              {"sharpness", s.sharpness},
              {"scheduled_onset", s.scheduled_onset}};
}

Json to_json(const TrialRecord& t) {
  return Json{{"trial_index", t.trial_index},
              {"intensity", t.intensity},
              {"onset_time", t.onset_time},
              {"response_latency", t.response_latency ? Json(*t.response_latency) : Json(nullptr)},
              {"outcome", to_string(t.outcome)},
              {"intended_direction_after", to_string(t.intended_direction_after)},
              {"is_reversal", t.is_reversal},
              {"resolved_at", t.resolved_at}};
}

TrialRecord trial_from_json(const Json& j) {
  TrialRecord t;
  t.trial_index = j.at("trial_index").get<int>();
  t.intensity = j.at("intensity").get<double>();
  t.onset_time = j.at("onset_time").get<double>();
  if (!j.at("response_latency").is_null()) t.response_latency = j.at("response_latency").get<double>();
  t.outcome = outcome_from(j.at("outcome").get<std::string>());
  t.intended_direction_after = direction_from(j.at("intended_direction_after").get<std::string>());
  t.is_reversal = j.at("is_reversal").get<bool>();
  t.resolved_at = j.at("resolved_at").get<double>();
  return t;
}

Json to_json(const SessionResult& r, const std::string& session_id) {
  Json trials = Json::array();
  for (const auto& t : r.trials) trials.push_back(to_json(t));
  Json doc{{"schema", kResultSchema},
           {"config", to_json(r.config)},
           {"trials", trials},
           {"reversal_indices", r.reversal_indices},
           {"threshold_mean", finite_or_null(r.threshold_mean)},
           {"threshold_sd", finite_or_null(r.threshold_sd)},
           {"sd_convention", "sample"},
           {"false_positive_count", r.false_positive_count},
           {"late_response_count", r.late_response_count},
           {"spontaneous_press_count", r.spontaneous_press_count},
           {"termination", to_string(r.termination)},
           {"converged", r.converged()}};
  if (!session_id.empty()) doc["session_id"] = session_id;
  return doc;
}

SessionResult result_from_json(const Json& j) {
  if (j.value("schema", "") != kResultSchema) {
    throw Error(Errc::InvalidArgument, "not a session result document");
  }
  SessionResult r;
  r.config = config_from_json(j.at("config"));
  for (const auto& t : j.at("trials")) r.trials.push_back(trial_from_json(t));
  r.reversal_indices = j.at("reversal_indices").get<std::vector<int>>();
  r.threshold_mean = number_or_nan(j.at("threshold_mean"));
  r.threshold_sd = number_or_nan(j.at("threshold_sd"));
  r.false_positive_count = j.at("false_positive_count").get<int>();
  r.late_response_count = j.at("late_response_count").get<int>();
  r.spontaneous_press_count = j.at("spontaneous_press_count").get<int>();
  r.termination = termination_from(j.at("termination").get<std::string>());
  return r;
}

Json to_json(const BatchStats& b) {
  return Json{{"per_session_estimates", numbers(b.per_session_estimates)},
              {"mean", finite_or_null(b.mean)},
              {"sample_sd", finite_or_null(b.sample_sd)}};
}

Json to_json(const SpectrumResult& s, bool include_bins) {
  Json doc{{"sample_rate", s.sample_rate},
           {"n_fft", s.n_fft},
           {"resolution", s.resolution},
           {"window", to_string(s.window)},
           {"amplitude_units", "g, one-sided, coherent-gain compensated"},
           {"peak_frequency", finite_or_null(s.peak_frequency)},
           {"peak_amplitude", finite_or_null(s.peak_amplitude)}};
  if (include_bins) {
    doc["frequencies"] = numbers(s.frequencies);
    doc["amplitudes"] = numbers(s.amplitudes);
  }
  return doc;
}

Json to_json(const ConsistencyReport& r) {
  return Json{{"label", r.label},
              {"n_trials", r.n_trials},
              {"peak_amplitudes", numbers(r.peak_amplitudes)},
              {"rms_values", numbers(r.rms_values)},
              {"peak_frequencies", numbers(r.peak_frequencies)},
              {"mean_peak_amplitude", finite_or_null(r.mean_peak_amplitude)},
              {"mean_rms", finite_or_null(r.mean_rms)},
              {"mean_peak_frequency", finite_or_null(r.mean_peak_frequency)},
              {"cv_peak_amplitude", finite_or_null(r.cv_peak_amplitude)},
              {"cv_rms", finite_or_null(r.cv_rms)},
              {"peak_frequency_spread", finite_or_null(r.peak_frequency_spread)}};
}

Json to_json(const ComparisonSummary& s) {
  std::string more = s.verdict == Verdict::A ? s.label_a : s.verdict == Verdict::B ? s.label_b : "";
  return Json{{"label_a", s.label_a},
              {"label_b", s.label_b},
              {"ratio_cv_peak_amplitude", finite_or_null(s.ratio_cv_peak_amplitude)},
              {"ratio_cv_rms", finite_or_null(s.ratio_cv_rms)},
              {"ratio_peak_frequency_spread", finite_or_null(s.ratio_peak_frequency_spread)},
              {"verdict", to_string(s.verdict)},
              {"more_consistent", more.empty() ? Json(nullptr) : Json(more)}};
}

}  // namespace vstkit
