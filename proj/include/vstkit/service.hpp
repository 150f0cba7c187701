#pragma once

// Session orchestration for live tests.
//
// The server clock is authoritative: stimulus onsets are emitted at their
// scheduled times and a response's latency is its server receipt time minus
// the server onset time. Each session's engine is owned by the manager and
// all mutation happens under one mutex; event-stream readers only copy.
//
// The clock is injected. Live mode uses SteadyClock plus a scheduler thread;
// test mode uses ManualClock and advances only when told to.

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "vstkit/json_io.hpp"
#include "vstkit/session_store.hpp"

namespace vstkit {

class Clock {
 public:
  virtual ~Clock() = default;
  virtual double now() const = 0;  // seconds
};

class SteadyClock : public Clock {
 public:
  SteadyClock() : origin_(std::chrono::steady_clock::now()) {}
  double now() const override {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - origin_).count();
  }

 private:
  std::chrono::steady_clock::time_point origin_;
};

class ManualClock : public Clock {
 public:
  explicit ManualClock(double start = 0.0) : now_(start) {}
  double now() const override { return now_.load(); }
  void set(double t) { now_.store(t); }
  void advance(double dt) { now_.store(now_.load() + dt); }

 private:
  std::atomic<double> now_;
};

// An error carrying the HTTP status it maps to.
class ServiceError : public std::runtime_error {
 public:
  ServiceError(int status, std::string code, const std::string& message, Json details = nullptr)
      : std::runtime_error(message), status_(status), code_(std::move(code)), details_(std::move(details)) {}

  int status() const noexcept { return status_; }
  const std::string& code() const noexcept { return code_; }
  Json body() const;

 private:
  int status_;
  std::string code_;
  Json details_;
};

enum class ApiState { Running, Completed, Aborted };
const char* to_string(ApiState s);

// One entry of the client-facing stream. Stream seqs are dense per session
// and independent of the log's seqs: only StimulusOnset, TrialResolved and
// SessionCompleted are pushed to clients.
struct StreamEvent {
  long long seq = 0;
  std::string kind;
  Json data;
};

struct ResponseSummary {
  std::string outcome;  // detected | late_response | false_positive
  std::optional<int> trial_index;
  std::optional<double> latency;
  int false_positive_count = 0;
  ApiState state = ApiState::Running;
};

Json to_json(const ResponseSummary& s);

class SessionManager {
 public:
  // Without a data dir, sessions live in memory only.
  SessionManager(Clock& clock, std::optional<std::filesystem::path> data_dir = {},
                 std::optional<std::uint64_t> id_seed = {});
  ~SessionManager();

  SessionManager(const SessionManager&) = delete;
  SessionManager& operator=(const SessionManager&) = delete;

  // Body fields override StaircaseConfig defaults; a missing rng_seed is
  // drawn at random. Throws ServiceError 422 with per-field diagnostics.
  std::string create_session(const Json& body);
  std::string create_session(const StaircaseConfig& config);

  // Emits due onsets and expires closed windows across all running sessions.
  void poll();
  // Earliest clock time at which poll() has work to do.
  std::optional<double> next_wakeup() const;
  bool any_running() const;

  Json status(const std::string& id) const;
  ResponseSummary post_response(const std::string& id);
  Json result(const std::string& id) const;
  SessionResult session_result(const std::string& id) const;
  void abort(const std::string& id);
  ApiState state(const std::string& id) const;

  std::vector<StreamEvent> events_after(const std::string& id, long long last_seq) const;
  // Blocks until an event with seq > last_seq exists, the session is no
  // longer running, or the timeout passes. Returns true unless it timed out.
  bool wait_for_events(const std::string& id, long long last_seq, std::chrono::milliseconds timeout) const;

  // Live mode: a thread that calls poll() whenever work falls due.
  void start_scheduler();
  void stop_scheduler();

  Clock& clock() const { return clock_; }

 private:
  struct Entry {
    std::unique_ptr<RecordedSession> session;
    ApiState state = ApiState::Running;
    double created_at = 0.0;
    std::vector<StreamEvent> stream;
    std::size_t log_cursor = 0;
    Json result_doc;
  };

  Entry& find(const std::string& id);
  const Entry& find(const std::string& id) const;
  void advance(Entry& e, double session_now);
  void sync(Entry& e);
  std::string fresh_id();

  Clock& clock_;
  std::optional<std::filesystem::path> data_dir_;
  Rng id_rng_;
  mutable std::mutex mu_;
  mutable std::condition_variable changed_;
  std::map<std::string, Entry> sessions_;

  std::thread scheduler_;
  bool stopping_ = false;
};

// Parses a `lo,hi` band.
std::pair<double, double> parse_band(std::string_view text);

// Runs the standard analysis pipeline on an uploaded CSV body. Throws
// ServiceError 400 for unreadable input.
Json analyze_upload(std::string_view csv, const PipelineParams& params);

}  // namespace vstkit
