#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "elicit/corpus.hpp"
#include "elicit/evalharness.hpp"
#include "elicit/knowledge.hpp"
#include "elicit/rulemodel.hpp"

namespace elicit::server {

class ProjectStore;

/// A test question shown before regular tasks. Span conditions are graded by
/// token-set Jaccard against `expected_spans`; text conditions by the presence
/// of `must_contain` and absence of `must_omit` tokens in the answer.
struct GoldQuestion {
  std::string instance_id;
  Condition condition = Condition::Bow;
  std::vector<knowledge::Span> expected_spans;
  std::vector<std::string> must_contain;
  std::vector<std::string> must_omit;

  bool operator==(const GoldQuestion&) const = default;
};

enum class Qualification : std::uint8_t { Pending, Passed, Failed };
std::string_view to_string(Qualification q);

struct Session {
  std::string id;
  std::string project_id;
  std::string worker;
  Condition condition = Condition::Bow;
  std::vector<std::string> queue;        // sample ids, fixed order
  std::vector<std::string> gold;         // gold-question instance ids, asked first
  Qualification qualification = Qualification::Pending;
  std::size_t gold_correct = 0;
  std::set<std::string> completed;

  bool operator==(const Session&) const = default;
};

struct WorkbenchOptions {
  /// Directory holding one SQLite file per project. Empty keeps everything in memory.
  std::string data_dir;
  double jaccard_threshold = 0.5;
  textvec::SampleOptions sampling;
};

/// Service layer behind the HTTP API. Every operation is serialized per
/// project and, when a data directory is configured, committed to that
/// project's store before returning.
class Workbench {
 public:
  explicit Workbench(WorkbenchOptions options = {});
  ~Workbench();
  Workbench(const Workbench&) = delete;
  Workbench& operator=(const Workbench&) = delete;

  nlohmann::json create_project();
  nlohmann::json project_status(const std::string& project_id);

  /// Splits with the given sizes, or 80/20 of the balanced subset.
  nlohmann::json upload_corpus(const std::string& project_id, corpus::Corpus corpus,
                               std::optional<corpus::SplitSizes> sizes, std::uint64_t seed);
  nlohmann::json request_sample(const std::string& project_id, std::size_t m, std::uint64_t seed);
  nlohmann::json sample(const std::string& project_id);

  nlohmann::json set_gold_questions(const std::string& project_id, std::vector<GoldQuestion> questions);
  nlohmann::json set_project_taxonomy(const std::string& project_id, knowledge::Taxonomy t);

  nlohmann::json open_session(const std::string& project_id, const std::string& worker,
                              std::optional<Condition> condition);
  nlohmann::json session_status(const std::string& session_id);
  nlohmann::json next_task(const std::string& session_id);
  nlohmann::json check_qualification(const std::string& session_id,
                                     const std::vector<knowledge::Justification>& answers);
  nlohmann::json submit_justification(const std::string& session_id, knowledge::Justification j);
  nlohmann::json submit_taxonomy(const std::string& session_id, knowledge::Taxonomy t);

  eval::EvalReport compile_and_evaluate(const std::string& project_id, std::string_view condition);
  std::string export_repository(const std::string& project_id);

 private:
  struct Project;

  Project& project(const std::string& id);
  std::pair<Project&, Session&> session(const std::string& id);
  void load(const std::string& path);
  void persist(Project& p, bool corpus_changed);
  bool grade(const Project& p, const GoldQuestion& q, const knowledge::Justification& answer) const;

  WorkbenchOptions options_;
  std::mutex mutex_;  // guards projects_ and next_project_
  std::map<std::string, std::unique_ptr<Project>> projects_;
  std::uint64_t next_project_ = 1;
};

nlohmann::json to_json(const GoldQuestion& q);
GoldQuestion gold_question_from_json(const nlohmann::json& j);

/// HTTP status for an error code.
int http_status(ErrorCode code);
nlohmann::json error_body(const Error& e);

/// JSON API over a Workbench. Runs cpp-httplib's thread pool.
class HttpServer {
 public:
  explicit HttpServer(Workbench& workbench);
  ~HttpServer();

  /// Returns the bound port (an ephemeral one when port is 0).
  int bind(const std::string& host, int port);
  /// Blocks until stop().
  bool listen();
  void stop();
  void wait_until_ready();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace elicit::server
