#pragma once

#include <memory>
#include <string>

#include "vstkit/service.hpp"

namespace httplib {
class Server;
}

namespace vstkit {

// HTTP front end over a SessionManager.
//
//   POST /v1/sessions                 create (201 {session_id})
//   GET  /v1/sessions/{id}            status
//   GET  /v1/sessions/{id}/events     text/event-stream; resume with Last-Event-Seq
//   POST /v1/sessions/{id}/response   button press
//   POST /v1/sessions/{id}/abort
//   GET  /v1/sessions/{id}/result
//   POST /v1/analysis/spectrum        CSV body; ?band=lo,hi&order=&window=&channel=
//
// With a ManualClock, POST /v1/test/clock {"now": t} | {"advance": dt} |
// {"next": true} moves simulated time and polls.
class HttpServer {
 public:
  HttpServer(SessionManager& manager, ManualClock* test_clock = nullptr);
  ~HttpServer();

  int bind_to_any_port(const std::string& host);
  bool bind(const std::string& host, int port);
  bool listen_after_bind();
  void stop();

 private:
  void routes();

  SessionManager& manager_;
  ManualClock* test_clock_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace vstkit
