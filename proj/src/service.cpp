#include "vstkit/service.hpp"

#include <charconv>
#include <cmath>
#include <random>
#include <sstream>

#include "vstkit/consistency.hpp"

namespace vstkit {

Json ServiceError::body() const {
  Json b{{"error", code_}, {"message", what()}};
  if (!details_.is_null()) b["details"] = details_;
  return b;
}

const char* to_string(ApiState s) {
  switch (s) {
    case ApiState::Running: return "running";
    case ApiState::Completed: return "completed";
    case ApiState::Aborted: return "aborted";
  }
  return "unknown";
}

Json to_json(const ResponseSummary& s) {
  Json j{{"outcome", s.outcome},
         {"false_positive_count", s.false_positive_count},
         {"session_state", to_string(s.state)}};
  j["trial_index"] = s.trial_index ? Json(*s.trial_index) : Json(nullptr);
  j["latency_s"] = s.latency ? Json(*s.latency) : Json(nullptr);
  return j;
}

namespace {

std::uint64_t random_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

ServiceError unknown(const std::string& id) {
  return ServiceError(404, "UnknownSession", "no session " + id);
}

Json issues_json(const std::vector<ConfigIssue>& issues) {
  Json arr = Json::array();
  for (const auto& i : issues) arr.push_back(Json{{"field", i.field}, {"message", i.message}});
  return arr;
}

}  // namespace

SessionManager::SessionManager(Clock& clock, std::optional<std::filesystem::path> data_dir,
                               std::optional<std::uint64_t> id_seed)
    : clock_(clock), data_dir_(std::move(data_dir)), id_rng_(id_seed ? *id_seed : random_seed()) {}

SessionManager::~SessionManager() { stop_scheduler(); }

std::string SessionManager::fresh_id() {
  std::string id;
  do {
    id = make_uuid(id_rng_);
  } while (sessions_.contains(id));
  return id;
}

std::string SessionManager::create_session(const Json& body) {
  StaircaseConfig config;
  try {
    Json cfg = body.is_null() ? Json::object() : body;
    if (cfg.is_object() && !cfg.contains("rng_seed")) cfg["rng_seed"] = random_seed();
    config = config_from_json(cfg);
  } catch (const ConfigError& e) {
    throw ServiceError(422, "InvalidConfig", e.what(), issues_json(e.issues()));
  }
  return create_session(config);
}

std::string SessionManager::create_session(const StaircaseConfig& config) {
  if (auto issues = validate(config); !issues.empty()) {
    throw ServiceError(422, "InvalidConfig", ConfigError(issues).what(), issues_json(issues));
  }
  std::lock_guard lock(mu_);
  const std::string id = fresh_id();
  std::optional<std::filesystem::path> file;
  if (data_dir_) file = log_path(*data_dir_, id);
  Entry e;
  e.session = std::make_unique<RecordedSession>(id, config, file);
  e.created_at = clock_.now();
  auto& entry = sessions_.emplace(id, std::move(e)).first->second;
  advance(entry, 0.0);
  changed_.notify_all();
  return id;
}

SessionManager::Entry& SessionManager::find(const std::string& id) {
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw unknown(id);
  return it->second;
}

const SessionManager::Entry& SessionManager::find(const std::string& id) const {
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw unknown(id);
  return it->second;
}

void SessionManager::advance(Entry& e, double now) {
  RecordedSession& s = *e.session;
  while (e.state == ApiState::Running && !s.complete()) {
    const auto& pending = s.engine().pending();
    if (!pending) break;
    if (!s.window_open()) {
      if (pending->scheduled_onset > now) break;
      s.open_window(now);
      continue;
    }
    if (!s.expire(now)) break;
  }
  sync(e);
}

void SessionManager::sync(Entry& e) {
  const auto& events = e.session->log().events();
  for (; e.log_cursor < events.size(); ++e.log_cursor) {
    const SessionEvent& ev = events[e.log_cursor];
    StreamEvent out;
    out.seq = static_cast<long long>(e.stream.size());
    switch (ev.kind) {
      case EventKind::StimulusOnset:
        out.kind = "StimulusOnset";
        out.data = Json{{"trial_index", ev.payload.at("trial_index")},
                        {"intensity", ev.payload.at("intensity")},
                        {"duration", ev.payload.at("duration")},
                        {"sharpness", ev.payload.at("sharpness")},
                        {"onset_s", ev.timestamp},
                        {"emitted_at", ev.payload.at("emitted_at")}};
        break;
      case EventKind::TrialResolved:
        out.kind = "TrialResolved";
        out.data = ev.payload;
        break;
      case EventKind::SessionCompleted: {
        out.kind = "SessionCompleted";
        out.data = ev.payload;
        const std::string id = e.session->id();
        if (ev.payload.value("status", "") == "aborted") {
          e.state = ApiState::Aborted;
        } else {
          e.state = ApiState::Completed;
          const SessionResult r = e.session->result();
          e.result_doc = to_json(r, id);
          if (data_dir_) write_result_file(result_path(*data_dir_, id), r, id);
          out.data["result"] = "/v1/sessions/" + id + "/result";
        }
        break;
      }
      default:
        continue;
    }
    out.data["session_id"] = e.session->id();
    e.stream.push_back(std::move(out));
  }
}

void SessionManager::poll() {
  std::lock_guard lock(mu_);
  const double now = clock_.now();
  for (auto& [id, e] : sessions_) {
    if (e.state == ApiState::Running) advance(e, now - e.created_at);
  }
  changed_.notify_all();
}

std::optional<double> SessionManager::next_wakeup() const {
  std::lock_guard lock(mu_);
  std::optional<double> best;
  for (const auto& [id, e] : sessions_) {
    if (e.state != ApiState::Running) continue;
    const auto& pending = e.session->engine().pending();
    if (!pending) continue;
    const double due = e.created_at + (e.session->window_open() ? e.session->engine().window_close()
                                                                 : pending->scheduled_onset);
    if (!best || due < *best) best = due;
  }
  return best;
}

bool SessionManager::any_running() const {
  std::lock_guard lock(mu_);
  for (const auto& [id, e] : sessions_) {
    if (e.state == ApiState::Running) return true;
  }
  return false;
}

Json SessionManager::status(const std::string& id) const {
  std::lock_guard lock(mu_);
  const Entry& e = find(id);
  const Staircase& engine = e.session->engine();
  Json trials = Json::array();
  for (const auto& t : engine.trials()) trials.push_back(to_json(t));
  Json doc{{"session_id", id},
           {"state", to_string(e.state)},
           {"created_at", e.created_at},
           {"session_time", clock_.now() - e.created_at},
           {"config", to_json(engine.config())},
           {"trials", trials},
           {"reversal_count", engine.reversal_count()},
           {"false_positive_count", engine.false_positive_count()},
           {"current_stimulus", nullptr}};
  // Only an onset that has already happened is revealed.
  if (e.state == ApiState::Running && e.session->window_open() && engine.pending()) {
    const auto& p = *engine.pending();
    doc["current_stimulus"] = Json{{"trial_index", p.trial_index},
                                   {"intensity", p.intensity},
                                   {"duration", p.duration},
                                   {"sharpness", p.sharpness},
                                   {"onset_s", p.scheduled_onset}};
  }
  return doc;
}

ResponseSummary SessionManager::post_response(const std::string& id) {
  std::lock_guard lock(mu_);
  Entry& e = find(id);
  const double now = clock_.now() - e.created_at;
  if (e.state == ApiState::Running) advance(e, now);
  if (e.state != ApiState::Running) {
    throw ServiceError(409, "SessionNotRunning", "session " + id + " is " + to_string(e.state));
  }
  ResponseSummary summary;
  const PressOutcome out = e.session->press(now);
  if (const auto* rec = std::get_if<TrialRecord>(&out)) {
    summary.outcome = to_string(rec->outcome);
    summary.trial_index = rec->trial_index;
    summary.latency = rec->response_latency;
  } else {
    summary.outcome = "false_positive";
  }
  advance(e, now);
  summary.false_positive_count = e.session->engine().false_positive_count();
  summary.state = e.state;
  changed_.notify_all();
  return summary;
}

Json SessionManager::result(const std::string& id) const {
  std::lock_guard lock(mu_);
  const Entry& e = find(id);
  if (e.state != ApiState::Completed) {
    throw ServiceError(409, "NotCompleted", "session " + id + " is " + to_string(e.state));
  }
  return e.result_doc;
}

SessionResult SessionManager::session_result(const std::string& id) const {
  std::lock_guard lock(mu_);
  const Entry& e = find(id);
  if (e.state != ApiState::Completed) {
    throw ServiceError(409, "NotCompleted", "session " + id + " is " + to_string(e.state));
  }
  return e.session->result();
}

void SessionManager::abort(const std::string& id) {
  std::lock_guard lock(mu_);
  Entry& e = find(id);
  const double now = clock_.now() - e.created_at;
  if (e.state == ApiState::Running) advance(e, now);
  if (e.state != ApiState::Running) {
    throw ServiceError(409, "SessionNotRunning", "session " + id + " is " + to_string(e.state));
  }
  e.session->abort(std::max(now, e.session->engine().last_event_time()));
  sync(e);
  changed_.notify_all();
}

ApiState SessionManager::state(const std::string& id) const {
  std::lock_guard lock(mu_);
  return find(id).state;
}

std::vector<StreamEvent> SessionManager::events_after(const std::string& id, long long last_seq) const {
  std::lock_guard lock(mu_);
  const Entry& e = find(id);
  const auto start = static_cast<std::size_t>(std::max<long long>(last_seq + 1, 0));
  if (start >= e.stream.size()) return {};
  return {e.stream.begin() + static_cast<std::ptrdiff_t>(start), e.stream.end()};
}

bool SessionManager::wait_for_events(const std::string& id, long long last_seq,
                                     std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mu_);
  find(id);
  return changed_.wait_for(lock, timeout, [&] {
    const Entry& e = find(id);
    return static_cast<long long>(e.stream.size()) > last_seq + 1 || e.state != ApiState::Running;
  });
}

void SessionManager::start_scheduler() {
  if (scheduler_.joinable()) return;
  stopping_ = false;
  scheduler_ = std::thread([this] {
    while (true) {
      poll();
      const auto due = next_wakeup();
      std::unique_lock lock(mu_);
      if (stopping_) return;
      double wait_s = 0.05;
      if (due) wait_s = std::clamp(*due - clock_.now(), 0.0, 0.05);
      changed_.wait_for(lock, std::chrono::duration<double>(wait_s), [this] { return stopping_; });
      if (stopping_) return;
    }
  });
}

void SessionManager::stop_scheduler() {
  {
    std::lock_guard lock(mu_);
    stopping_ = true;
  }
  changed_.notify_all();
  if (scheduler_.joinable()) scheduler_.join();
}

std::pair<double, double> parse_band(std::string_view text) {
  const auto comma = text.find(',');
  auto number = [&](std::string_view s) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
      throw Error(Errc::InvalidArgument, "band must be 'low,high' in Hz, got '" + std::string(text) + "'");
    }
    return v;
  };
  if (comma == std::string_view::npos) number("");
  return {number(text.substr(0, comma)), number(text.substr(comma + 1))};
}

Json analyze_upload(std::string_view csv, const PipelineParams& params) {
  try {
    std::istringstream in{std::string(csv)};
    const WaveformRecord w = load_waveform(in, "upload");
    const TrialAnalysis a = analyze(w, params);
    Json doc = to_json(a.spectrum);
    doc["rms"] = a.rms;
    doc["band"] = {params.band_low, params.band_high};
    doc["order"] = params.order;
    doc["n_samples"] = w.size();
    return doc;
  } catch (const Error& e) {
    throw ServiceError(400, to_string(e.code()), e.what());
  }
}

}  // namespace vstkit
