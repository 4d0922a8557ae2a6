#include <sstream>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "elicit/server.hpp"

namespace elicit::server {

using nlohmann::json;

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotFound:
    case ErrorCode::MissingInstance:
      return 404;
    case ErrorCode::Lifecycle:
    case ErrorCode::ConditionMismatch:
    case ErrorCode::OutOfQueue:
    case ErrorCode::InsufficientData:
    case ErrorCode::EmptyCorpus:
      return 409;
    case ErrorCode::SessionLocked:
      return 403;
    case ErrorCode::ValidationFailed:
      return 422;
    case ErrorCode::Io:
    case ErrorCode::Storage:
      return 500;
    default:
      return 400;
  }
}

json error_body(const Error& e) {
  json body{{"code", to_string(e.code())}, {"message", e.what()}};
  if (!e.violations().empty()) {
    json v = json::array();
    for (const auto& x : e.violations()) {
      v.push_back({{"code", x.code}, {"message", x.message}, {"field", x.field}});
    }
    body["violations"] = std::move(v);
  }
  return body;
}

namespace {

void send(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    send(res, http_status(e.code()), error_body(e));
  } catch (const json::exception& e) {
    send(res, 400, error_body(Error(ErrorCode::Parse, std::string("malformed request: ") + e.what())));
  } catch (const std::exception& e) {
    spdlog::error("request failed: {}", e.what());
    send(res, 500, error_body(Error(ErrorCode::Io, e.what())));
  }
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  json j = json::parse(req.body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(ErrorCode::Parse, "request body must be a JSON object");
  }
  return j;
}

std::optional<std::uint64_t> uint_field(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  if (!j[key].is_number_unsigned()) {
    throw Error(ErrorCode::InvalidArgument, std::string(key) + " must be a non-negative integer");
  }
  return j[key].get<std::uint64_t>();
}

std::optional<std::uint64_t> uint_param(const httplib::Request& req, const char* key) {
  if (!req.has_param(key)) return std::nullopt;
  const std::string v = req.get_param_value(key);
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) {
    throw Error(ErrorCode::InvalidArgument, std::string(key) + " must be a non-negative integer");
  }
  return std::stoull(v);
}

std::optional<corpus::SplitSizes> split_sizes(std::optional<std::uint64_t> train,
                                              std::optional<std::uint64_t> test) {
  if (!train && !test) return std::nullopt;
  if (!train || !test) throw Error(ErrorCode::InvalidArgument, "train_n and test_n go together");
  return corpus::SplitSizes{*train, *test};
}

}  // namespace

struct HttpServer::Impl {
  Workbench& wb;
  httplib::Server svr;

  explicit Impl(Workbench& w) : wb(w) { routes(); }

  void routes() {
    svr.Post("/projects", [this](const httplib::Request&, httplib::Response& res) {
      guarded(res, [&] { send(res, 201, wb.create_project()); });
    });
    svr.Get(R"(/projects/([\w-]+))", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { send(res, 200, wb.project_status(req.matches[1])); });
    });
    svr.Post(R"(/projects/([\w-]+)/corpus)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { upload(req, res); });
    });
    svr.Post(R"(/projects/([\w-]+)/sample)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const json body = parse_body(req);
        const auto m = uint_field(body, "m");
        if (!m) throw Error(ErrorCode::InvalidArgument, "m is required");
        send(res, 200, wb.request_sample(req.matches[1], *m, uint_field(body, "seed").value_or(0)));
      });
    });
    svr.Get(R"(/projects/([\w-]+)/sample)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { send(res, 200, wb.sample(req.matches[1])); });
    });
    svr.Post(R"(/projects/([\w-]+)/gold-questions)",
             [this](const httplib::Request& req, httplib::Response& res) {
               guarded(res, [&] {
                 const json body = parse_body(req);
                 std::vector<GoldQuestion> qs;
                 for (const auto& q : body.at("questions")) qs.push_back(gold_question_from_json(q));
                 send(res, 200, wb.set_gold_questions(req.matches[1], std::move(qs)));
               });
             });
    svr.Post(R"(/projects/([\w-]+)/taxonomy)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        send(res, 200, wb.set_project_taxonomy(req.matches[1], knowledge::taxonomy_from_json(parse_body(req))));
      });
    });
    svr.Post(R"(/projects/([\w-]+)/sessions)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const json body = parse_body(req);
        std::optional<Condition> c;
        if (body.contains("condition") && !body["condition"].is_null()) {
          c = parse_condition(body["condition"].get<std::string>());
        }
        send(res, 201, wb.open_session(req.matches[1], body.value("worker", ""), c));
      });
    });
    svr.Get(R"(/sessions/([\w-]+))", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { send(res, 200, wb.session_status(req.matches[1])); });
    });
    svr.Get(R"(/sessions/([\w-]+)/next-task)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { send(res, 200, wb.next_task(req.matches[1])); });
    });
    svr.Post(R"(/sessions/([\w-]+)/qualification)",
             [this](const httplib::Request& req, httplib::Response& res) {
               guarded(res, [&] {
                 const json body = parse_body(req);
                 std::vector<knowledge::Justification> answers;
                 for (const auto& a : body.at("answers")) {
                   answers.push_back(knowledge::justification_from_json(a));
                 }
                 send(res, 200, wb.check_qualification(req.matches[1], answers));
               });
             });
    svr.Post(R"(/sessions/([\w-]+)/taxonomy)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        send(res, 201, wb.submit_taxonomy(req.matches[1], knowledge::taxonomy_from_json(parse_body(req))));
      });
    });
    svr.Post(R"(/sessions/([\w-]+)/justifications)",
             [this](const httplib::Request& req, httplib::Response& res) {
               guarded(res, [&] {
                 send(res, 201,
                      wb.submit_justification(req.matches[1], knowledge::justification_from_json(parse_body(req))));
               });
             });
    svr.Post(R"(/projects/([\w-]+)/models/([\w-]+)/evaluate)",
             [this](const httplib::Request& req, httplib::Response& res) {
               guarded(res, [&] {
                 send(res, 200, eval::to_json(wb.compile_and_evaluate(req.matches[1], req.matches[2].str())));
               });
             });
    svr.Get(R"(/projects/([\w-]+)/repository)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        res.status = 200;
        res.set_content(wb.export_repository(req.matches[1]), "application/json");
      });
    });
    svr.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
      if (res.body.empty()) {
        const ErrorCode code = res.status == 404 ? ErrorCode::NotFound : ErrorCode::InvalidArgument;
        res.set_content(error_body(Error(code, "no route for " + req.method + " " + req.path)).dump(),
                        "application/json");
      }
    });
  }

  void upload(const httplib::Request& req, httplib::Response& res) {
    const std::string type = req.get_header_value("Content-Type");
    std::string ndjson;
    std::optional<std::uint64_t> seed, train, test;
    if (type.find("ndjson") != std::string::npos || type.find("jsonl") != std::string::npos) {
      ndjson = req.body;
      seed = uint_param(req, "seed");
      train = uint_param(req, "train_n");
      test = uint_param(req, "test_n");
    } else {
      const json body = parse_body(req);
      if (!body.contains("records") || !body["records"].is_array()) {
        throw Error(ErrorCode::InvalidArgument, "records must be an array of {text, stars}");
      }
      // Same per-record handling as a file upload: bad records are skipped and counted.
      for (const auto& r : body["records"]) ndjson += r.dump() + "\n";
      seed = uint_field(body, "seed");
      train = uint_field(body, "train_n");
      test = uint_field(body, "test_n");
    }
    std::istringstream in(ndjson);
    corpus::Corpus c = corpus::ingest_jsonl(in, seed.value_or(0));
    send(res, 200, wb.upload_corpus(req.matches[1], std::move(c), split_sizes(train, test), seed.value_or(0)));
  }
};

HttpServer::HttpServer(Workbench& workbench) : impl_(std::make_unique<Impl>(workbench)) {}
HttpServer::~HttpServer() = default;

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->svr.bind_to_any_port(host);
  return impl_->svr.bind_to_port(host, port) ? port : -1;
}

bool HttpServer::listen() { return impl_->svr.listen_after_bind(); }
void HttpServer::stop() { impl_->svr.stop(); }
void HttpServer::wait_until_ready() { impl_->svr.wait_until_ready(); }

}  // namespace elicit::server
