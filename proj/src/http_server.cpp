#include "vstkit/http_server.hpp"

#include <memory>

#include "httplib.h"

namespace vstkit {

namespace {

void send_json(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, const ServiceError& e) { send_json(res, e.status(), e.body()); }

Json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return Json::object();
  try {
    return Json::parse(req.body);
  } catch (const std::exception& e) {
    throw ServiceError(400, "MalformedJson", e.what());
  }
}

// Wraps a handler so ServiceError and library errors become JSON responses.
template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const ServiceError& e) {
      send_error(res, e);
    } catch (const Error& e) {
      send_error(res, ServiceError(400, to_string(e.code()), e.what()));
    } catch (const std::exception& e) {
      send_error(res, ServiceError(500, "Internal", e.what()));
    }
  };
}

std::string sse_frame(const StreamEvent& ev) {
  return "id: " + std::to_string(ev.seq) + "\nevent: " + ev.kind + "\ndata: " + ev.data.dump() + "\n\n";
}

long long last_seq_from(const httplib::Request& req) {
  std::string value;
  if (req.has_header("Last-Event-Seq")) {
    value = req.get_header_value("Last-Event-Seq");
  } else if (req.has_header("Last-Event-ID")) {
    value = req.get_header_value("Last-Event-ID");
  } else if (req.has_param("last_seq")) {
    value = req.get_param_value("last_seq");
  }
  if (value.empty()) return -1;
  try {
    return std::stoll(value);
  } catch (const std::exception&) {
    throw ServiceError(400, "BadHeader", "Last-Event-Seq must be an integer");
  }
}

PipelineParams pipeline_from(const httplib::Request& req) {
  PipelineParams p;
  try {
    if (req.has_param("band")) std::tie(p.band_low, p.band_high) = parse_band(req.get_param_value("band"));
    if (req.has_param("order")) p.order = std::stoi(req.get_param_value("order"));
    if (req.has_param("window")) p.window = parse_window(req.get_param_value("window"));
    if (req.has_param("interpolate")) p.interpolate = req.get_param_value("interpolate") != "0";
    if (req.has_param("channel")) {
      const std::string c = req.get_param_value("channel");
      if (c == "x") p.channel = ChannelSelect::Axis(0);
      else if (c == "y") p.channel = ChannelSelect::Axis(1);
      else if (c == "z") p.channel = ChannelSelect::Axis(2);
      else if (c == "mag") p.channel = ChannelSelect::Magnitude();
      else throw Error(Errc::InvalidArgument, "channel must be x, y, z or mag");
    }
  } catch (const Error& e) {
    throw ServiceError(400, to_string(e.code()), e.what());
  } catch (const std::exception& e) {
    throw ServiceError(400, "InvalidArgument", e.what());
  }
  return p;
}

}  // namespace

HttpServer::HttpServer(SessionManager& manager, ManualClock* test_clock)
    : manager_(manager), test_clock_(test_clock), server_(std::make_unique<httplib::Server>()) {
  routes();
}

HttpServer::~HttpServer() { stop(); }

void HttpServer::routes() {
  auto& s = *server_;
  SessionManager& m = manager_;

  s.Post("/v1/sessions", guarded([&m](const httplib::Request& req, httplib::Response& res) {
    const std::string id = m.create_session(parse_body(req));
    res.set_header("Location", "/v1/sessions/" + id);
    send_json(res, 201, Json{{"session_id", id}});
  }));

  s.Get(R"(/v1/sessions/([^/]+))", guarded([&m](const httplib::Request& req, httplib::Response& res) {
    send_json(res, 200, m.status(req.matches[1]));
  }));

  s.Post(R"(/v1/sessions/([^/]+)/response)", guarded([&m](const httplib::Request& req, httplib::Response& res) {
    send_json(res, 200, to_json(m.post_response(req.matches[1])));
  }));

  s.Post(R"(/v1/sessions/([^/]+)/abort)", guarded([&m](const httplib::Request& req, httplib::Response& res) {
    m.abort(req.matches[1]);
    send_json(res, 200, Json{{"session_id", req.matches[1]}, {"state", "aborted"}});
  }));

  s.Get(R"(/v1/sessions/([^/]+)/result)", guarded([&m](const httplib::Request& req, httplib::Response& res) {
    send_json(res, 200, m.result(req.matches[1]));
  }));

  s.Get(R"(/v1/sessions/([^/]+)/events)", guarded([&m](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    m.state(id);  // 404 before the stream starts
    auto cursor = std::make_shared<long long>(last_seq_from(req));
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider(
        "text/event-stream", [&m, id, cursor](std::size_t, httplib::DataSink& sink) {
          m.wait_for_events(id, *cursor, std::chrono::milliseconds(250));
          for (const auto& ev : m.events_after(id, *cursor)) {
            const std::string frame = sse_frame(ev);
            if (!sink.write(frame.data(), frame.size())) return false;
            *cursor = ev.seq;
          }
          if (m.state(id) != ApiState::Running && m.events_after(id, *cursor).empty()) {
            sink.done();
            return true;
          }
          return sink.is_writable();
        });
  }));

  s.Post("/v1/analysis/spectrum", guarded([](const httplib::Request& req, httplib::Response& res) {
    send_json(res, 200, analyze_upload(req.body, pipeline_from(req)));
  }));

  if (test_clock_ != nullptr) {
    ManualClock* clock = test_clock_;
    s.Post("/v1/test/clock", guarded([&m, clock](const httplib::Request& req, httplib::Response& res) {
      const Json body = parse_body(req);
      double target = clock->now();
      if (body.contains("now")) {
        target = body["now"].get<double>();
      } else if (body.contains("advance")) {
        target += body["advance"].get<double>();
      } else if (body.value("next", false)) {
        if (const auto due = m.next_wakeup()) target = std::max(target, *due);
      }
      if (target < clock->now() && m.any_running()) {
        throw ServiceError(409, "ClockBackwards", "cannot rewind the clock while sessions are running");
      }
      clock->set(target);
      m.poll();
      send_json(res, 200, Json{{"now", clock->now()}});
    }));
  }
}

int HttpServer::bind_to_any_port(const std::string& host) { return server_->bind_to_any_port(host); }

bool HttpServer::bind(const std::string& host, int port) { return server_->bind_to_port(host, port); }

bool HttpServer::listen_after_bind() { return server_->listen_after_bind(); }

void HttpServer::stop() {
  if (server_) server_->stop();
}

}  // namespace vstkit
