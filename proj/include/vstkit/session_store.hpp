#pragma once

// Event-sourced session logs.
//
// A session is stored as sessions/<id>.jsonl: one JSON document per line,
// seq dense from 0, SessionCreated first and SessionCompleted last. The
// final result is stored next to it as sessions/<id>.result.json. Replaying
// a log re-drives the staircase engine with the logged presses and timeouts
// and checks every derived value against what was logged.

#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "vstkit/json_io.hpp"
#include "vstkit/staircase.hpp"

namespace vstkit {

enum class EventKind {
  SessionCreated,
  StimulusScheduled,
  StimulusOnset,
  ResponseReceived,
  TrialResolved,
  SessionCompleted,
};

const char* to_string(EventKind k);
EventKind event_kind_from(const std::string& name);

struct SessionEvent {
  std::string session_id;
  long long seq = 0;
  double timestamp = 0.0;  // s since session start
  EventKind kind = EventKind::SessionCreated;
  Json payload = Json::object();
};

Json to_json(const SessionEvent& e);
SessionEvent event_from_json(const Json& j);

// Append-only log. With a file path every accepted event is written as one
// line and flushed before append() returns.
class EventLog {
 public:
  explicit EventLog(std::string session_id, std::optional<std::filesystem::path> file = {});

  // Throws SequenceGap, SessionClosed or InvalidArgument (wrong session or
  // first event not SessionCreated).
  void append(const SessionEvent& event);

  const std::string& session_id() const noexcept { return session_id_; }
  const std::vector<SessionEvent>& events() const noexcept { return events_; }
  long long next_seq() const noexcept { return static_cast<long long>(events_.size()); }
  bool closed() const noexcept { return closed_; }

 private:
  std::string session_id_;
  std::vector<SessionEvent> events_;
  std::optional<std::ofstream> file_;
  bool closed_ = false;
};

// Parses line-delimited events. A final line that does not parse and is not
// newline-terminated is a torn write: it is dropped and a warning is added.
// Any other unparseable line is CorruptLog.
std::vector<SessionEvent> read_events(std::istream& in, std::vector<std::string>* warnings = nullptr);
std::vector<SessionEvent> read_events_file(const std::filesystem::path& path,
                                           std::vector<std::string>* warnings = nullptr);

// Throws CorruptLogError at the first event that is malformed, out of
// sequence, or disagrees with the re-driven engine; also when the log ends
// before SessionCompleted or records an aborted session.
SessionResult replay(const std::vector<SessionEvent>& events, const std::string& session_id = {});

// A staircase engine whose every step is written to an EventLog. The next
// stimulus is always scheduled as soon as the previous trial resolves.
class RecordedSession {
 public:
  RecordedSession(std::string session_id, const StaircaseConfig& config,
                  std::optional<std::filesystem::path> log_file = {});

  const std::string& id() const noexcept { return log_.session_id(); }
  const Staircase& engine() const noexcept { return engine_; }
  const EventLog& log() const noexcept { return log_; }
  bool complete() const noexcept { return engine_.complete(); }
  bool aborted() const noexcept { return aborted_; }
  bool window_open() const noexcept { return window_open_; }

  // Logs StimulusOnset for the pending stimulus (timestamped at its scheduled
  // onset; `emitted_at` records when it actually went out).
  void open_window(double emitted_at);

  // Simulated-time convenience: opens the pending window at its scheduled
  // onset and returns the stimulus.
  StimulusCommand next_stimulus();

  PressOutcome press(double time);
  TrialRecord timeout();
  std::optional<TrialRecord> expire(double now);
  void abort(double now);

  SessionResult result() const { return engine_.threshold_estimate(); }

 private:
  void append(double timestamp, EventKind kind, Json payload);
  void after_resolution(const TrialRecord& record);
  void schedule();

  Staircase engine_;
  EventLog log_;
  bool window_open_ = false;
  bool aborted_ = false;
};

std::filesystem::path sessions_dir(const std::filesystem::path& data_dir);
std::filesystem::path log_path(const std::filesystem::path& data_dir, const std::string& id);
std::filesystem::path result_path(const std::filesystem::path& data_dir, const std::string& id);

void write_result_file(const std::filesystem::path& path, const SessionResult& result,
                       const std::string& session_id);
SessionResult read_result_file(const std::filesystem::path& path);

// `trial,intensity,onset_s,latency_s,outcome,is_reversal`; latency is empty
// for missed trials, is_reversal is 1 or 0.
std::string export_trials_csv(const SessionResult& result);

// Random (version 4 layout) UUID drawn from `rng`.
std::string make_uuid(Rng& rng);

}  // namespace vstkit
