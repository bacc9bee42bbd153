#include "smpa/service.hpp"

#include <iostream>

#include <fmt/format.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "smpa/crypto.hpp"
#include "smpa/reporting.hpp"

namespace smpa {

using nlohmann::json;

int http_status_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::AuthError:
      return 401;
    case ErrorCode::UnknownAssessment:
    case ErrorCode::UnknownParticipant:
    case ErrorCode::UnknownProcess:
    case ErrorCode::NotFound:
      return 404;
    case ErrorCode::InvalidState:
    case ErrorCode::BankMismatch:
      return 409;
    case ErrorCode::ParseError:
      return 400;
    case ErrorCode::StoreLocked:
      return 503;
    case ErrorCode::IoError:
      return 500;
    default:
      return 422;
  }
}

namespace {

json error_body(const Error& e) {
  return json{{"error",
               {{"code", std::string(to_string(e.code()))},
                {"message", e.message()},
                {"path", e.path()}}}};
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) {
    return json::object();
  }
  try {
    auto body = json::parse(req.body);
    if (!body.is_object()) {
      throw Error(ErrorCode::ParseError, "request body must be a JSON object");
    }
    return body;
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

std::string bearer(const httplib::Request& req) {
  const auto header = req.get_header_value("Authorization");
  constexpr std::string_view kPrefix = "Bearer ";
  if (header.size() <= kPrefix.size() || header.compare(0, kPrefix.size(), kPrefix) != 0) {
    return {};
  }
  return header.substr(kPrefix.size());
}

std::string require_string(const json& body, const char* key) {
  auto it = body.find(key);
  if (it == body.end() || !it->is_string()) {
    throw Error(ErrorCode::ValidationError, "expected a string", key);
  }
  return it->get<std::string>();
}

std::vector<Assignment> parse_assignments(const json& body) {
  auto it = body.find("assignments");
  if (it == body.end() || !it->is_array()) {
    throw Error(ErrorCode::ValidationError, "expected an array", "assignments");
  }
  std::vector<Assignment> out;
  for (std::size_t i = 0; i < it->size(); ++i) {
    const auto& a = (*it)[i];
    const auto path = fmt::format("assignments[{}]", i);
    if (!a.is_object() || !a.contains("process") || !a["process"].is_string() ||
        !a.contains("role") || !a["role"].is_string()) {
      throw Error(ErrorCode::ValidationError, "expected {process, role}", path);
    }
    auto role = parse_role(a["role"].get<std::string>());
    if (!role) {
      throw Error(ErrorCode::ValidationError, "unknown role", path + ".role");
    }
    out.push_back(Assignment{a["process"].get<std::string>(), *role});
  }
  return out;
}

}  // namespace

struct Service::Impl {
  ServiceConfig config;
  std::shared_ptr<const ContentBank> bank;
  std::unique_ptr<Store> store;
  httplib::Server server;
  int port = -1;

  using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

  // Wraps a handler so domain errors become error bodies.
  Handler guarded(Handler inner) {
    return [inner = std::move(inner)](const httplib::Request& req, httplib::Response& res) {
      try {
        inner(req, res);
      } catch (const Error& e) {
        send_json(res, http_status_for(e.code()), error_body(e));
      } catch (const json::exception& e) {
        send_json(res, 422, error_body(Error(ErrorCode::ValidationError, e.what())));
      }
    };
  }

  Handler facilitator(std::function<void(const httplib::Request&, httplib::Response&)> inner) {
    return guarded([this, inner = std::move(inner)](const httplib::Request& req,
                                                    httplib::Response& res) {
      if (!constant_time_equal(bearer(req), config.facilitator_key)) {
        throw Error(ErrorCode::AuthError, "facilitator key required");
      }
      inner(req, res);
    });
  }

  Handler participant(std::function<void(const TokenOwner&, const httplib::Request&,
                                         httplib::Response&)>
                          inner) {
    return guarded([this, inner = std::move(inner)](const httplib::Request& req,
                                                    httplib::Response& res) {
      const auto owner = store->authenticate(bearer(req));
      inner(owner, req, res);
    });
  }

  void routes() {
    server.Get("/healthz", [this](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200,
                {{"status", "ok"},
                 {"service", "smpa"},
                 {"bank_fingerprint", bank->fingerprint()},
                 {"bank_schema_version", bank->schema_version()}});
    });

    server.Post("/api/v1/assessments", facilitator([this](const httplib::Request& req, httplib::Response& res) {
      const auto body = parse_body(req);
      std::vector<std::string> processes;
      if (auto it = body.find("processes"); it != body.end() && it->is_array()) {
        for (const auto& p : *it) {
          if (!p.is_string()) throw Error(ErrorCode::ValidationError, "expected a string", "processes");
          processes.push_back(p.get<std::string>());
        }
      } else {
        throw Error(ErrorCode::ValidationError, "expected an array", "processes");
      }
      int target = 5;
      if (auto it = body.find("target_level"); it != body.end()) {
        if (!it->is_number_integer()) {
          throw Error(ErrorCode::ValidationError, "expected an integer", "target_level");
        }
        target = it->get<int>();
      }
      std::string org = body.contains("org_profile") ? require_string(body, "org_profile") : "";
      auto a = store->create({}, std::move(org), std::move(processes),
                             capability_level_from_int(target));
      send_json(res, 201, assessment_summary_json(a));
    }));

    server.Get("/api/v1/assessments", facilitator([this](const httplib::Request&, httplib::Response& res) {
      json list = json::array();
      for (const auto& id : store->assessment_ids()) {
        list.push_back(assessment_summary_json(store->get(id)));
      }
      send_json(res, 200, {{"assessments", std::move(list)}});
    }));

    server.Get(R"(/api/v1/assessments/([^/]+))", facilitator([this](const httplib::Request& req, httplib::Response& res) {
      send_json(res, 200, assessment_summary_json(store->get(req.matches[1].str())));
    }));

    server.Post(R"(/api/v1/assessments/([^/]+)/participants)",
                facilitator([this](const httplib::Request& req, httplib::Response& res) {
                  const auto body = parse_body(req);
                  auto reg = store->register_participant(req.matches[1].str(),
                                                         require_string(body, "display_name"),
                                                         parse_assignments(body));
                  json assignments = json::array();
                  for (const auto& a : reg.participant.assignments) {
                    assignments.push_back({{"process", a.process}, {"role", to_string(a.role)}});
                  }
                  send_json(res, 201,
                            {{"participant",
                              {{"id", reg.participant.id},
                               {"display_name", reg.participant.display_name},
                               {"assignments", std::move(assignments)}}},
                             {"token", reg.token}});
                }));

    server.Post(R"(/api/v1/assessments/([^/]+)/open)", facilitator([this](const httplib::Request& req, httplib::Response& res) {
      store->open(req.matches[1].str());
      send_json(res, 200, assessment_summary_json(store->get(req.matches[1].str())));
    }));

    server.Post(R"(/api/v1/assessments/([^/]+)/close)", facilitator([this](const httplib::Request& req, httplib::Response& res) {
      store->close(req.matches[1].str());
      send_json(res, 200, assessment_summary_json(store->get(req.matches[1].str())));
    }));

    server.Get(R"(/api/v1/assessments/([^/]+)/progress)",
               facilitator([this](const httplib::Request& req, httplib::Response& res) {
                 send_json(res, 200, to_json(store->progress_of(req.matches[1].str())));
               }));

    server.Get(R"(/api/v1/assessments/([^/]+)/results)",
               facilitator([this](const httplib::Request& req, httplib::Response& res) {
                 auto results = store->results_of(req.matches[1].str(), config.measurement);
                 auto body = results_to_json(results);
                 body["assessment"] = req.matches[1].str();
                 body["method"] = to_json(config.measurement);
                 send_json(res, 200, body);
               }));

    server.Post(R"(/api/v1/assessments/([^/]+)/report)",
                facilitator([this](const httplib::Request& req, httplib::Response& res) {
                  auto report = store->build_report(req.matches[1].str(), config.measurement);
                  send_json(res, 200, report_to_json(report));
                }));

    server.Get(R"(/api/v1/assessments/([^/]+)/report)",
               facilitator([this](const httplib::Request& req, httplib::Response& res) {
                 const auto format =
                     parse_report_format(req.has_param("format") ? req.get_param_value("format")
                                                                 : std::string("structured"));
                 auto report = store->stored_report(req.matches[1].str());
                 if (!report) {
                   throw Error(ErrorCode::NotFound, "report has not been built yet");
                 }
                 const char* type = format == ReportFormat::Html       ? "text/html; charset=utf-8"
                                    : format == ReportFormat::Markdown ? "text/markdown; charset=utf-8"
                                                                       : "application/json";
                 res.status = 200;
                 res.set_content(render_report(*report, format), type);
               }));

    server.Get("/api/v1/me/questionnaire",
               participant([this](const TokenOwner& owner, const httplib::Request&, httplib::Response& res) {
                 const auto a = store->get(owner.assessment);
                 auto sections = questionnaire_to_json(
                     allocate_questionnaire(a, *bank, owner.participant));
                 for (auto& section : sections) {
                   const auto process = section["process"].get<std::string>();
                   for (auto& q : section["questions"]) {
                     auto it = a.responses.find(
                         ResponseKey{owner.participant, process, q["id"].get<std::string>()});
                     q["answer"] = it == a.responses.end() ? json(nullptr)
                                                           : json(to_string(it->second.answer));
                   }
                 }
                 send_json(res, 200,
                           {{"assessment", owner.assessment},
                            {"participant", owner.participant},
                            {"state", to_string(a.state)},
                            {"sections", std::move(sections)}});
               }));

    server.Post("/api/v1/me/responses",
                participant([this](const TokenOwner& owner, const httplib::Request& req, httplib::Response& res) {
                  const auto body = parse_body(req);
                  const auto answer_text = require_string(body, "answer");
                  auto answer = parse_answer(answer_text);
                  if (!answer) {
                    throw Error(ErrorCode::ValidationError,
                                fmt::format("unknown answer '{}'", answer_text), "answer");
                  }
                  const bool first =
                      store->submit(owner.assessment, owner.participant,
                                    require_string(body, "process"),
                                    require_string(body, "question"), *answer);
                  send_json(res, 200, {{"stored", true}, {"first", first}});
                }));

    server.Get("/api/v1/me/progress",
               participant([this](const TokenOwner& owner, const httplib::Request&, httplib::Response& res) {
                 const auto snap = store->progress_of(owner.assessment);
                 for (const auto& pp : snap.participants) {
                   if (pp.participant == owner.participant) {
                     auto body = to_json(pp);
                     body["state"] = to_string(snap.state);
                     send_json(res, 200, body);
                     return;
                   }
                 }
                 throw Error(ErrorCode::UnknownParticipant, "participant not found");
               }));

    if (config.static_dir) {
      server.set_mount_point("/", config.static_dir->string());
    }
    if (config.access_log) {
      server.set_logger([](const httplib::Request& req, const httplib::Response& res) {
        std::cerr << req.method << ' ' << req.path << ' ' << res.status << '\n';
      });
    }
  }
};

Service::Service(ServiceConfig config) : impl_(std::make_unique<Impl>()) {
  if (config.facilitator_key.empty()) {
    throw Error(ErrorCode::ValidationError, "a facilitator key is required", "FACILITATOR_KEY");
  }
  config.measurement.scale.validate();
  impl_->bank = std::make_shared<const ContentBank>(ContentBank::load_file(config.bank_path));
  impl_->store = std::make_unique<Store>(config.data_dir, impl_->bank);
  impl_->config = std::move(config);
  impl_->routes();
}

Service::~Service() { stop(); }

int Service::bind() {
  auto& cfg = impl_->config;
  if (cfg.port == 0) {
    impl_->port = impl_->server.bind_to_any_port(cfg.host);
  } else {
    impl_->port = impl_->server.bind_to_port(cfg.host, cfg.port) ? cfg.port : -1;
  }
  if (impl_->port <= 0) {
    throw Error(ErrorCode::IoError, fmt::format("cannot bind {}:{}", cfg.host, cfg.port));
  }
  return impl_->port;
}

void Service::run() { impl_->server.listen_after_bind(); }

void Service::stop() {
  if (impl_ && impl_->server.is_running()) {
    impl_->server.stop();
  }
}

Store& Service::store() { return *impl_->store; }

}  // namespace smpa
