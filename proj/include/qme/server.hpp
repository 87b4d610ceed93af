#pragma once

// JSON-over-HTTP front end for elicitation sessions.
//
//   POST /sessions                 config -> {"id", "phase"}
//   GET  /sessions/{id}/query      pending query or {"done": true}
//   POST /sessions/{id}/answer     {"query_id", "preferred": "left"|"right"}
//   GET  /sessions/{id}/result     elicited metric and match fraction

#include "qme/session.hpp"

#include <memory>
#include <string>

namespace qme {

/// Fields absent from the body keep the values in `defaults`.
SessionConfig session_config_from_json(const std::string& body,
                                       const SessionConfig& defaults = {});

std::string query_json(const Session& session);
std::string result_json(const Session& session);

/// HTTP status for an error code.
int http_status(ErrorCode code);

class SessionServer {
 public:
  explicit SessionServer(SessionConfig defaults = {});
  ~SessionServer();
  SessionServer(const SessionServer&) = delete;
  SessionServer& operator=(const SessionServer&) = delete;

  /// Binds and serves until stop(); returns false if binding failed.
  bool listen(const std::string& host, int port);
  /// Binds to a free port and returns it, or -1.
  int bind_any(const std::string& host);
  /// Serves on the port from bind_any until stop().
  bool serve();
  void stop();
  void wait_until_ready() const;

  SessionManager& sessions() { return sessions_; }

 private:
  struct Impl;
  SessionConfig defaults_;
  SessionManager sessions_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace qme
