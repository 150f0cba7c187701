#include "vstkit/session_store.hpp"

#include <charconv>
#include <istream>
#include <sstream>

namespace vstkit {

namespace {

constexpr EventKind kAllKinds[] = {EventKind::SessionCreated, EventKind::StimulusScheduled,
                                   EventKind::StimulusOnset,  EventKind::ResponseReceived,
                                   EventKind::TrialResolved,  EventKind::SessionCompleted};

std::string shortest(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

// Every key of `expected` must be present in `logged` with an identical value.
void check_payload(long long seq, const Json& logged, const Json& expected) {
  for (const auto& [key, value] : expected.items()) {
    if (!logged.contains(key)) throw CorruptLogError(seq, "field " + key + " missing");
    if (logged[key] != value) {
      throw CorruptLogError(seq, "field " + key + ": logged " + logged[key].dump() +
                                     ", replayed " + value.dump());
    }
  }
}

Json stimulus_fields(const StimulusCommand& s) {
  return Json{{"trial_index", s.trial_index},
              {"intensity", s.intensity},
              {"duration", s.duration},
              {"sharpness", s.sharpness}};
}

Json completion_payload(const SessionResult& r) {
  return Json{{"status", "completed"},
              {"termination", to_string(r.termination)},
              {"threshold_mean", std::isfinite(r.threshold_mean) ? Json(r.threshold_mean) : Json(nullptr)},
              {"threshold_sd", std::isfinite(r.threshold_sd) ? Json(r.threshold_sd) : Json(nullptr)},
              {"reversals", r.reversal_indices.size()},
              {"false_positive_count", r.false_positive_count}};
}

}  // namespace

const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::SessionCreated: return "SessionCreated";
    case EventKind::StimulusScheduled: return "StimulusScheduled";
    case EventKind::StimulusOnset: return "StimulusOnset";
    case EventKind::ResponseReceived: return "ResponseReceived";
    case EventKind::TrialResolved: return "TrialResolved";
    case EventKind::SessionCompleted: return "SessionCompleted";
  }
  return "Unknown";
}

EventKind event_kind_from(const std::string& name) {
  for (EventKind k : kAllKinds) {
    if (name == to_string(k)) return k;
  }
  throw Error(Errc::InvalidArgument, "unknown event kind '" + name + "'");
}

Json to_json(const SessionEvent& e) {
  return Json{{"session_id", e.session_id},
              {"seq", e.seq},
              {"timestamp", e.timestamp},
              {"kind", to_string(e.kind)},
              {"payload", e.payload}};
}

SessionEvent event_from_json(const Json& j) {
  SessionEvent e;
  e.session_id = j.at("session_id").get<std::string>();
  e.seq = j.at("seq").get<long long>();
  e.timestamp = j.at("timestamp").get<double>();
  e.kind = event_kind_from(j.at("kind").get<std::string>());
  e.payload = j.at("payload");
  return e;
}

EventLog::EventLog(std::string session_id, std::optional<std::filesystem::path> file)
    : session_id_(std::move(session_id)) {
  if (file) {
    if (file->has_parent_path()) std::filesystem::create_directories(file->parent_path());
    file_.emplace(*file, std::ios::out | std::ios::app);
    if (!*file_) throw Error(Errc::InvalidArgument, "cannot open log " + file->string());
  }
}

void EventLog::append(const SessionEvent& event) {
  if (closed_) throw Error(Errc::SessionClosed, "log for " + session_id_ + " is closed");
  if (event.session_id != session_id_) {
    throw Error(Errc::InvalidArgument, "event for session " + event.session_id + " in log " + session_id_);
  }
  if (event.seq != next_seq()) {
    throw Error(Errc::SequenceGap, "expected seq " + std::to_string(next_seq()) + ", got " +
                                       std::to_string(event.seq));
  }
  if ((event.seq == 0) != (event.kind == EventKind::SessionCreated)) {
    throw Error(Errc::InvalidArgument, "SessionCreated must be exactly the first event");
  }
  if (file_) {
    *file_ << to_json(event).dump() << '\n';
    file_->flush();
    if (!*file_) throw Error(Errc::InvalidArgument, "write to log failed");
  }
  events_.push_back(event);
  if (event.kind == EventKind::SessionCompleted) {
    closed_ = true;
    file_.reset();
  }
}

std::vector<SessionEvent> read_events(std::istream& in, std::vector<std::string>* warnings) {
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  std::vector<SessionEvent> events;
  std::size_t pos = 0;
  long long line_no = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    const bool terminated = nl != std::string::npos;
    const std::string line = text.substr(pos, terminated ? nl - pos : std::string::npos);
    pos = terminated ? nl + 1 : text.size();
    ++line_no;
    if (line.empty()) continue;
    try {
      events.push_back(event_from_json(Json::parse(line)));
    } catch (const std::exception& e) {
      if (!terminated) {
        if (warnings) warnings->push_back("dropped torn final line " + std::to_string(line_no));
        break;
      }
      throw CorruptLogError(static_cast<long long>(events.size()),
                            "line " + std::to_string(line_no) + " does not parse: " + e.what());
    }
  }
  return events;
}

std::vector<SessionEvent> read_events_file(const std::filesystem::path& path,
                                           std::vector<std::string>* warnings) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::InvalidArgument, "cannot open " + path.string());
  return read_events(in, warnings);
}

SessionResult replay(const std::vector<SessionEvent>& events, const std::string& session_id) {
  if (events.empty()) throw CorruptLogError(-1, "log is empty");
  const SessionEvent& first = events.front();
  if (first.seq != 0 || first.kind != EventKind::SessionCreated) {
    throw CorruptLogError(first.seq, "log must start with SessionCreated at seq 0");
  }
  const std::string id = session_id.empty() ? first.session_id : session_id;

  std::optional<Staircase> engine;
  try {
    engine.emplace(config_from_json(first.payload.at("config")));
  } catch (const std::exception& e) {
    throw CorruptLogError(0, std::string("bad config: ") + e.what());
  }

  std::optional<TrialRecord> from_press;
  for (std::size_t i = 1; i < events.size(); ++i) {
    const SessionEvent& ev = events[i];
    const long long seq = static_cast<long long>(i);
    if (ev.seq != seq) throw CorruptLogError(seq, "expected seq " + std::to_string(seq) + ", found " + std::to_string(ev.seq));
    if (ev.session_id != id) throw CorruptLogError(seq, "event belongs to session " + ev.session_id);
    try {
      switch (ev.kind) {
        case EventKind::SessionCreated:
          throw CorruptLogError(seq, "duplicate SessionCreated");
        case EventKind::StimulusScheduled: {
          if (engine->pending()) throw CorruptLogError(seq, "stimulus scheduled twice");
          const StimulusCommand cmd = engine->next_stimulus();
          check_payload(seq, ev.payload, to_json(cmd));
          break;
        }
        case EventKind::StimulusOnset: {
          if (!engine->pending()) throw CorruptLogError(seq, "onset without a scheduled stimulus");
          check_payload(seq, ev.payload, stimulus_fields(*engine->pending()));
          break;
        }
        case EventKind::ResponseReceived: {
          const PressOutcome out = engine->press(ev.payload.at("press_time").get<double>());
          const bool attributed = std::holds_alternative<TrialRecord>(out);
          check_payload(seq, ev.payload, Json{{"attributed", attributed ? "trial" : "spontaneous"}});
          if (attributed) from_press = std::get<TrialRecord>(out);
          break;
        }
        case EventKind::TrialResolved: {
          const TrialRecord rec = from_press ? *from_press : engine->timeout();
          from_press.reset();
          check_payload(seq, ev.payload, to_json(rec));
          break;
        }
        case EventKind::SessionCompleted: {
          if (ev.payload.value("status", "") == "aborted") {
            throw CorruptLogError(seq, "session was aborted; it has no result");
          }
          if (i + 1 != events.size()) throw CorruptLogError(seq + 1, "events after SessionCompleted");
          if (!engine->complete()) throw CorruptLogError(seq, "SessionCompleted before the staircase finished");
          SessionResult result = engine->threshold_estimate();
          check_payload(seq, ev.payload, completion_payload(result));
          return result;
        }
      }
    } catch (const CorruptLogError&) {
      throw;
    } catch (const std::exception& e) {
      throw CorruptLogError(seq, e.what());
    }
  }
  throw CorruptLogError(-1, "log ends at seq " + std::to_string(events.back().seq) +
                                " before SessionCompleted (truncated)");
}

RecordedSession::RecordedSession(std::string session_id, const StaircaseConfig& config,
                                 std::optional<std::filesystem::path> log_file)
    : engine_(config), log_(std::move(session_id), std::move(log_file)) {
  append(0.0, EventKind::SessionCreated, Json{{"config", to_json(config)}});
  schedule();
}

void RecordedSession::append(double timestamp, EventKind kind, Json payload) {
  log_.append(SessionEvent{log_.session_id(), log_.next_seq(), timestamp, kind, std::move(payload)});
}

void RecordedSession::schedule() {
  const StimulusCommand cmd = engine_.next_stimulus();
  append(engine_.last_event_time(), EventKind::StimulusScheduled, to_json(cmd));
  window_open_ = false;
}

void RecordedSession::open_window(double emitted_at) {
  if (window_open_ || !engine_.pending()) return;
  Json payload = stimulus_fields(*engine_.pending());
  payload["emitted_at"] = emitted_at;
  append(engine_.pending()->scheduled_onset, EventKind::StimulusOnset, std::move(payload));
  window_open_ = true;
}

StimulusCommand RecordedSession::next_stimulus() {
  if (!engine_.pending()) throw Error(Errc::SessionComplete, "no further stimuli");
  open_window(engine_.pending()->scheduled_onset);
  return *engine_.pending();
}

void RecordedSession::after_resolution(const TrialRecord& record) {
  append(record.resolved_at, EventKind::TrialResolved, to_json(record));
  if (engine_.complete()) {
    append(record.resolved_at, EventKind::SessionCompleted, completion_payload(engine_.threshold_estimate()));
  } else {
    schedule();
  }
}

PressOutcome RecordedSession::press(double time) {
  if (aborted_) throw Error(Errc::SessionClosed, "session aborted");
  if (engine_.pending() && time >= engine_.pending()->scheduled_onset) open_window(time);
  PressOutcome out = engine_.press(time);
  const bool attributed = std::holds_alternative<TrialRecord>(out);
  Json payload{{"press_time", time}, {"attributed", attributed ? "trial" : "spontaneous"}};
  if (attributed) payload["trial_index"] = std::get<TrialRecord>(out).trial_index;
  append(time, EventKind::ResponseReceived, std::move(payload));
  if (attributed) after_resolution(std::get<TrialRecord>(out));
  return out;
}

TrialRecord RecordedSession::timeout() {
  if (aborted_) throw Error(Errc::SessionClosed, "session aborted");
  if (engine_.pending()) open_window(engine_.pending()->scheduled_onset);
  const TrialRecord rec = engine_.timeout();
  after_resolution(rec);
  return rec;
}

std::optional<TrialRecord> RecordedSession::expire(double now) {
  if (aborted_ || engine_.complete() || !engine_.pending()) return std::nullopt;
  if (now < engine_.window_close()) return std::nullopt;
  return timeout();
}

void RecordedSession::abort(double now) {
  if (aborted_ || engine_.complete()) throw Error(Errc::SessionClosed, "session is not running");
  aborted_ = true;
  append(now, EventKind::SessionCompleted, Json{{"status", "aborted"}});
}

std::filesystem::path sessions_dir(const std::filesystem::path& data_dir) { return data_dir / "sessions"; }

std::filesystem::path log_path(const std::filesystem::path& data_dir, const std::string& id) {
  return sessions_dir(data_dir) / (id + ".jsonl");
}

std::filesystem::path result_path(const std::filesystem::path& data_dir, const std::string& id) {
  return sessions_dir(data_dir) / (id + ".result.json");
}

void write_result_file(const std::filesystem::path& path, const SessionResult& result,
                       const std::string& session_id) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << to_json(result, session_id).dump(2) << '\n';
  if (!out) throw Error(Errc::InvalidArgument, "cannot write " + path.string());
}

SessionResult read_result_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::InvalidArgument, "cannot open " + path.string());
  return result_from_json(Json::parse(in));
}

std::string export_trials_csv(const SessionResult& result) {
  std::string out = "trial,intensity,onset_s,latency_s,outcome,is_reversal\n";
  for (const auto& t : result.trials) {
    out += std::to_string(t.trial_index);
    out += ',' + shortest(t.intensity);
    out += ',' + shortest(t.onset_time);
    out += ',';
    if (t.response_latency) out += shortest(*t.response_latency);
    out += ',';
    out += to_string(t.outcome);
    out += t.is_reversal ? ",1\n" : ",0\n";
  }
  return out;
}

std::string make_uuid(Rng& rng) {
  std::uint64_t hi = rng.next_u64();
  std::uint64_t lo = rng.next_u64();
  hi = (hi & 0xffffffffffff0fffULL) | 0x0000000000004000ULL;
  lo = (lo & 0x3fffffffffffffffULL) | 0x8000000000000000ULL;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%08x-%04x-%04x-%04x-%012llx",
                static_cast<unsigned>(hi >> 32), static_cast<unsigned>((hi >> 16) & 0xffff),
                static_cast<unsigned>(hi & 0xffff), static_cast<unsigned>(lo >> 48),
                static_cast<unsigned long long>(lo & 0xffffffffffffULL));
  return buf;
}

}  // namespace vstkit
