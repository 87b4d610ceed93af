#include "qme/server.hpp"

#include "json_util.hpp"

#include "httplib.h"

namespace qme {

using detail::json;

SessionConfig session_config_from_json(const std::string& body,
                                       const SessionConfig& defaults) {
  SessionConfig cfg = defaults;
  try {
    const json j = body.empty() ? json::object() : json::parse(body);
    require(j.is_object(), ErrorCode::kInvalidArgument,
            "session config must be a JSON object");
    if (j.contains("mode")) cfg.mode = parse_session_mode(j.at("mode").get<std::string>());
    if (j.contains("k")) {
      const int k = j.at("k").get<int>();
      // A new class count invalidates inherited per-class vectors.
      if (k != cfg.k) {
        cfg.priors.reset();
        cfg.tau.reset();
      }
      cfg.k = k;
    }
    if (j.contains("m")) cfg.groups = j.at("m").get<int>();
    if (j.contains("rho")) cfg.rho = j.at("rho").get<double>();
    if (j.contains("varrho")) cfg.varrho = j.at("varrho").get<double>();
    if (j.contains("epsilon")) cfg.epsilon = j.at("epsilon").get<double>();
    if (j.contains("priors")) cfg.priors = detail::vector_from_json(j.at("priors"));
    if (j.contains("tau")) cfg.tau = group_model_from_json(j.at("tau").dump());
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("evaluation_queries")) {
      cfg.evaluation_queries = j.at("evaluation_queries").get<int>();
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string("malformed session config: ") + e.what());
  }
  validate(cfg);
  return cfg;
}

namespace {

json rendering_json(const Vector& priors, const Vector& rates) {
  const ConfusionRendering c = render_confusion(priors, rates);
  json j;
  j["priors"] = detail::to_json_array(priors);
  j["rates"] = detail::to_json_array(c.rates);
  j["correct"] = detail::to_json_array(c.correct);
  j["incorrect"] = detail::to_json_array(c.incorrect);
  j["actual_totals"] = detail::to_json_array(c.actual_totals);
  if (rates.size() == 2) {
    j["predicted_totals"] = detail::to_json_array(c.predicted_totals);
    j["tp"] = c.correct(0);
    j["fn"] = c.incorrect(0);
    j["tn"] = c.correct(1);
    j["fp"] = c.incorrect(1);
  }
  return j;
}

json side_json(const SessionConfig& cfg, const Matrix& profile) {
  json groups = json::array();
  const Vector priors = cfg.class_priors();
  if (cfg.mode == SessionMode::kFair) {
    const GroupModel gm = cfg.group_model();
    for (int g = 0; g < cfg.groups; ++g) {
      json panel = rendering_json(group_priors(priors, gm, g), profile.col(g));
      panel["group"] = g + 1;
      groups.push_back(std::move(panel));
    }
  } else {
    groups.push_back(rendering_json(priors, profile.col(0)));
  }
  return json{{"groups", groups}};
}

json error_json(const std::string& message) { return json{{"error", message}}; }

}  // namespace

std::string query_json(const Session& session) {
  const auto view = session.next_query();
  if (!view) return json{{"done", true}, {"phase", "done"}}.dump();
  const SessionConfig& cfg = session.config();
  json j;
  j["done"] = false;
  j["query_id"] = view->id;
  j["phase"] = to_string(view->phase);
  j["mode"] = to_string(cfg.mode);
  j["left"] = side_json(cfg, view->left);
  j["right"] = side_json(cfg, view->right);
  return j.dump();
}

std::string result_json(const Session& session) {
  const SessionResult r = session.result();
  json j;
  j["phase"] = "done";
  j["mode"] = to_string(session.config().mode);
  j["elicitation_queries"] = r.elicitation_queries;
  j["evaluation_queries"] = r.evaluation_queries;
  j["match"] = r.match;
  if (r.metric) {
    j["metric"] = json::parse(to_json(*r.metric, -1));
    if (session.config().mode == SessionMode::kLinear) {
      const auto& m = std::get<QuadraticMetric>(r.metric->metric);
      const std::string weights = weight_string(m);
      if (!weights.empty()) j["weight_string"] = weights;
    }
  } else {
    j["metric"] = nullptr;
    j["error"] = r.error;
  }
  return j.dump();
}

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound:
      return 404;
    case ErrorCode::kStaleQuery:
    case ErrorCode::kNotReady:
      return 409;
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kDimensionMismatch:
    case ErrorCode::kNoInteriorSphere:
      return 400;
    case ErrorCode::kAssumptionViolated:
    case ErrorCode::kRegularityViolation:
    case ErrorCode::kCostSignViolation:
      return 422;
  }
  return 500;
}

struct SessionServer::Impl {
  httplib::Server http;
  int port = -1;
};

SessionServer::SessionServer(SessionConfig defaults)
    : defaults_(std::move(defaults)), impl_(std::make_unique<Impl>()) {
  auto& http = impl_->http;
  http.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                            {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                            {"Access-Control-Allow-Headers", "Content-Type"}});

  // Runs a handler, mapping library errors to JSON error bodies.
  auto guarded = [](auto fn) {
    return [fn](const httplib::Request& req, httplib::Response& res) {
      try {
        fn(req, res);
      } catch (const Error& e) {
        res.status = http_status(e.code());
        res.set_content(error_json(e.what()).dump(), "application/json");
      } catch (const std::exception& e) {
        res.status = 500;
        res.set_content(error_json(e.what()).dump(), "application/json");
      }
    };
  };
  auto reply = [](httplib::Response& res, const std::string& body, int status = 200) {
    res.status = status;
    res.set_content(body, "application/json");
  };

  http.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.status = 204;
  });

  http.Post("/sessions", guarded([this, reply](const httplib::Request& req,
                                              httplib::Response& res) {
    const SessionConfig cfg = session_config_from_json(req.body, defaults_);
    const std::string id = sessions_.create(cfg);
    const auto session = sessions_.get(id);
    reply(res, json{{"id", id}, {"phase", to_string(session->phase())}}.dump(), 201);
  }));

  http.Get(R"(/sessions/([^/]+)/query)",
           guarded([this, reply](const httplib::Request& req, httplib::Response& res) {
             reply(res, query_json(*sessions_.get(req.matches[1])));
           }));

  http.Post(R"(/sessions/([^/]+)/answer)",
            guarded([this, reply](const httplib::Request& req, httplib::Response& res) {
              const auto session = sessions_.get(req.matches[1]);
              std::size_t query_id = 0;
              std::string preferred;
              try {
                const json j = json::parse(req.body);
                query_id = j.at("query_id").get<std::size_t>();
                preferred = j.at("preferred").get<std::string>();
              } catch (const json::exception& e) {
                throw Error(ErrorCode::kInvalidArgument,
                            std::string("malformed answer: ") + e.what());
              }
              require(preferred == "left" || preferred == "right",
                      ErrorCode::kInvalidArgument,
                      "preferred must be \"left\" or \"right\"");
              session->answer(query_id, preferred == "left");
              reply(res, json{{"accepted", true},
                              {"phase", to_string(session->phase())}}
                             .dump());
            }));

  http.Get(R"(/sessions/([^/]+)/result)",
           guarded([this, reply](const httplib::Request& req, httplib::Response& res) {
             reply(res, result_json(*sessions_.get(req.matches[1])));
           }));
}

SessionServer::~SessionServer() { stop(); }

bool SessionServer::listen(const std::string& host, int port) {
  impl_->port = port;
  return impl_->http.listen(host, port);
}

int SessionServer::bind_any(const std::string& host) {
  impl_->port = impl_->http.bind_to_any_port(host);
  return impl_->port;
}

bool SessionServer::serve() { return impl_->http.listen_after_bind(); }

void SessionServer::stop() {
  if (impl_) impl_->http.stop();
}

void SessionServer::wait_until_ready() const { impl_->http.wait_until_ready(); }

}  // namespace qme
