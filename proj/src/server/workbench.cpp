#include <algorithm>
#include <filesystem>

#include <spdlog/spdlog.h>

#include "elicit/server.hpp"
#include "elicit/textvec.hpp"
#include "store.hpp"

namespace elicit::server {

using nlohmann::json;

namespace {

constexpr int kMetaVersion = 1;

enum class Stage { Created, CorpusLoaded, Sampled };

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::Created: return "created";
    case Stage::CorpusLoaded: return "corpus_loaded";
    case Stage::Sampled: return "sampled";
  }
  return "created";
}

Qualification parse_qualification(std::string_view s) {
  if (s == "passed") return Qualification::Passed;
  if (s == "failed") return Qualification::Failed;
  return Qualification::Pending;
}

bool span_condition(Condition c) {
  return c == Condition::Bow || c == Condition::ConceptBow || c == Condition::ConceptAnnotation;
}

std::vector<knowledge::Span> answer_spans(const knowledge::Justification& j) {
  std::vector<knowledge::Span> out;
  std::visit(
      [&](const auto& body) {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, knowledge::BagOfWords>) {
          out = body.spans;
        } else if constexpr (std::is_same_v<T, knowledge::ConceptBagOfWords>) {
          for (const auto& item : body.items) out.insert(out.end(), item.spans.begin(), item.spans.end());
        } else if constexpr (std::is_same_v<T, knowledge::ConceptAnnotation>) {
          for (const auto& item : body.items) {
            out.insert(out.end(), item.topic_spans.begin(), item.topic_spans.end());
            out.insert(out.end(), item.description_spans.begin(), item.description_spans.end());
          }
        }
      },
      j.body);
  return out;
}

// Indices of the tokens of `text` that overlap any span.
std::set<std::size_t> covered_tokens(const textvec::TokenStream& tokens,
                                     const std::vector<knowledge::Span>& spans) {
  std::set<std::size_t> out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    for (const auto& s : spans) {
      if (tokens[i].start < s.end && s.start < tokens[i].end) {
        out.insert(i);
        break;
      }
    }
  }
  return out;
}

std::string answer_text(const knowledge::Justification& j) {
  if (const auto* p = std::get_if<knowledge::Perturbation>(&j.body)) return p->perturbed_text;
  if (const auto* s = std::get_if<knowledge::Simplification>(&j.body)) return s->simplified_text;
  return {};
}

json session_json(const Session& s) {
  return json{{"id", s.id},
              {"project", s.project_id},
              {"worker", s.worker},
              {"condition", to_string(s.condition)},
              {"qualification", to_string(s.qualification)},
              {"gold_questions", s.gold.size()},
              {"progress", {{"completed", s.completed.size()}, {"total", s.queue.size()}}}};
}

json stored_session_json(const Session& s) {
  json j = session_json(s);
  j["queue"] = s.queue;
  j["gold"] = s.gold;
  j["gold_correct"] = s.gold_correct;
  j["completed"] = s.completed;
  return j;
}

Session session_from_json(const json& j) {
  Session s;
  s.id = j.at("id").get<std::string>();
  s.project_id = j.at("project").get<std::string>();
  s.worker = j.at("worker").get<std::string>();
  s.condition = parse_condition(j.at("condition").get<std::string>());
  s.qualification = parse_qualification(j.at("qualification").get<std::string>());
  s.queue = j.at("queue").get<std::vector<std::string>>();
  s.gold = j.at("gold").get<std::vector<std::string>>();
  s.gold_correct = j.at("gold_correct").get<std::size_t>();
  s.completed = j.at("completed").get<std::set<std::string>>();
  return s;
}

json instance_json(const knowledge::InstanceRecord& r) {
  return json{{"id", r.id}, {"text", r.text}, {"label", to_string(r.label)}};
}

}  // namespace

std::string_view to_string(Qualification q) {
  switch (q) {
    case Qualification::Pending: return "pending";
    case Qualification::Passed: return "passed";
    case Qualification::Failed: return "failed";
  }
  return "pending";
}

json to_json(const GoldQuestion& q) {
  json spans = json::array();
  for (const auto& s : q.expected_spans) spans.push_back(knowledge::to_json(s));
  return json{{"instance_id", q.instance_id},
              {"condition", to_string(q.condition)},
              {"expected_spans", std::move(spans)},
              {"must_contain", q.must_contain},
              {"must_omit", q.must_omit}};
}

GoldQuestion gold_question_from_json(const json& j) {
  try {
    GoldQuestion q;
    q.instance_id = j.at("instance_id").get<std::string>();
    q.condition = parse_condition(j.at("condition").get<std::string>());
    for (const auto& s : j.value("expected_spans", json::array())) {
      q.expected_spans.push_back(knowledge::span_from_json(s));
    }
    for (const auto& t : j.value("must_contain", std::vector<std::string>{})) q.must_contain.push_back(to_lower_ascii(t));
    for (const auto& t : j.value("must_omit", std::vector<std::string>{})) q.must_omit.push_back(to_lower_ascii(t));
    return q;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("malformed gold question: ") + e.what());
  }
}

struct Workbench::Project {
  std::mutex mutex;
  std::string id;
  Stage stage = Stage::Created;
  std::optional<corpus::Corpus> corpus;
  std::string corpus_hash;
  std::vector<std::string> sample;
  std::uint64_t sample_seed = 0;
  knowledge::KnowledgeRepository repo;
  std::vector<GoldQuestion> gold;
  std::vector<Session> sessions;
  std::uint64_t round_robin = 0;  // sessions assigned a condition by default
  std::map<std::string, std::string> models;  // condition tag -> serialized model
  std::map<std::string, eval::EvalReport> reports;
  std::unique_ptr<ProjectStore> store;

  json meta() const {
    json gold_json = json::array();
    for (const auto& q : gold) gold_json.push_back(to_json(q));
    json sessions_json = json::array();
    for (const auto& s : sessions) sessions_json.push_back(stored_session_json(s));
    json reports_json = json::object();
    for (const auto& [tag, r] : reports) reports_json[tag] = eval::to_json(r);
    return json{{"meta_version", kMetaVersion},
                {"id", id},
                {"stage", to_string(stage)},
                {"corpus_hash", corpus_hash},
                {"sample", {{"ids", sample}, {"seed", sample_seed}}},
                {"gold_questions", std::move(gold_json)},
                {"sessions", std::move(sessions_json)},
                {"round_robin", round_robin},
                {"reports", std::move(reports_json)}};
  }

  Session* find_session(const std::string& sid) {
    auto it = std::find_if(sessions.begin(), sessions.end(), [&](const Session& s) { return s.id == sid; });
    return it == sessions.end() ? nullptr : &*it;
  }

  const corpus::Corpus& require_corpus() const {
    if (!corpus) throw Error(ErrorCode::Lifecycle, "project " + id + " has no corpus; upload one first");
    return *corpus;
  }

  void require_sampled() const {
    if (stage != Stage::Sampled) {
      throw Error(ErrorCode::Lifecycle, "project " + id + " has no sample; request one first");
    }
  }
};

Workbench::Workbench(WorkbenchOptions options) : options_(std::move(options)) {
  if (options_.data_dir.empty()) return;
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(options_.data_dir, ec);
  if (ec) throw Error(ErrorCode::Storage, "cannot create " + options_.data_dir + ": " + ec.message());
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(options_.data_dir)) {
    if (entry.path().extension() == ".sqlite") files.push_back(entry.path().string());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) load(f);
}

Workbench::~Workbench() = default;

void Workbench::load(const std::string& path) {
  auto p = std::make_unique<Project>();
  p->store = std::make_unique<ProjectStore>(path);
  const auto meta_text = p->store->get("meta");
  if (!meta_text) {
    spdlog::warn("{} has no project metadata; ignored", path);
    return;
  }
  try {
    const json meta = json::parse(*meta_text);
    if (meta.at("meta_version").get<int>() != kMetaVersion) {
      throw Error(ErrorCode::VersionedFormat,
                  path + " has metadata version " + meta.at("meta_version").dump() +
                      ", this build reads version " + std::to_string(kMetaVersion));
    }
    p->id = meta.at("id").get<std::string>();
    const std::string stage = meta.at("stage").get<std::string>();
    p->stage = stage == "sampled" ? Stage::Sampled : stage == "corpus_loaded" ? Stage::CorpusLoaded : Stage::Created;
    p->corpus_hash = meta.at("corpus_hash").get<std::string>();
    p->sample = meta.at("sample").at("ids").get<std::vector<std::string>>();
    p->sample_seed = meta.at("sample").at("seed").get<std::uint64_t>();
    for (const auto& q : meta.at("gold_questions")) p->gold.push_back(gold_question_from_json(q));
    for (const auto& s : meta.at("sessions")) p->sessions.push_back(session_from_json(s));
    p->round_robin = meta.at("round_robin").get<std::uint64_t>();
    for (const auto& [tag, r] : meta.at("reports").items()) p->reports[tag] = eval::report_from_json(r);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::CorruptFile, path + ": malformed project metadata: " + e.what());
  }
  if (auto c = p->store->get("corpus")) p->corpus = corpus::deserialize(*c);
  if (auto r = p->store->get("repository")) p->repo = knowledge::import_repository(*r);
  for (Condition c : kAllConditions) {
    const std::string tag(to_string(c));
    if (auto m = p->store->get("model:" + tag)) p->models[tag] = *m;
  }

  const auto n = p->id.size() > 1 ? std::strtoull(p->id.c_str() + 1, nullptr, 10) : 0;
  next_project_ = std::max<std::uint64_t>(next_project_, n + 1);
  spdlog::info("loaded project {} from {}", p->id, path);
  std::string id = p->id;
  projects_.emplace(std::move(id), std::move(p));
}

void Workbench::persist(Project& p, bool corpus_changed) {
  if (!p.store) return;
  std::vector<std::pair<std::string, std::string>> docs;
  docs.emplace_back("meta", p.meta().dump());
  docs.emplace_back("repository", knowledge::export_repository(p.repo));
  if (corpus_changed && p.corpus) docs.emplace_back("corpus", corpus::serialize(*p.corpus));
  for (const auto& [tag, m] : p.models) docs.emplace_back("model:" + tag, m);
  p.store->put(docs);
}

Workbench::Project& Workbench::project(const std::string& id) {
  std::lock_guard lock(mutex_);
  auto it = projects_.find(id);
  if (it == projects_.end()) throw Error(ErrorCode::NotFound, "no project '" + id + "'");
  return *it->second;
}

std::pair<Workbench::Project&, Session&> Workbench::session(const std::string& id) {
  const auto dash = id.rfind("-s");
  if (dash == std::string::npos) throw Error(ErrorCode::NotFound, "no session '" + id + "'");
  Project& p = project(id.substr(0, dash));
  Session* s = p.find_session(id);
  if (!s) throw Error(ErrorCode::NotFound, "no session '" + id + "'");
  return {p, *s};
}

json Workbench::create_project() {
  std::lock_guard lock(mutex_);
  auto p = std::make_unique<Project>();
  p->id = "p" + std::to_string(next_project_++);
  if (!options_.data_dir.empty()) {
    p->store = std::make_unique<ProjectStore>(
        (std::filesystem::path(options_.data_dir) / (p->id + ".sqlite")).string());
    persist(*p, false);
  }
  json out{{"id", p->id}, {"stage", to_string(p->stage)}};
  std::string id = p->id;
  projects_.emplace(std::move(id), std::move(p));
  return out;
}

json Workbench::project_status(const std::string& project_id) {
  Project& p = project(project_id);
  std::lock_guard lock(p.mutex);
  json out{{"id", p.id},
           {"stage", to_string(p.stage)},
           {"corpus_hash", p.corpus_hash},
           {"sample_size", p.sample.size()},
           {"sessions", p.sessions.size()},
           {"justifications", p.repo.size()},
           {"repository_revision", p.repo.revision()}};
  json reports = json::array();
  for (const auto& [_, r] : p.reports) reports.push_back(eval::to_json(r));
  out["reports"] = std::move(reports);
  return out;
}

json Workbench::upload_corpus(const std::string& project_id, corpus::Corpus corpus,
                              std::optional<corpus::SplitSizes> sizes, std::uint64_t seed) {
  Project& p = project(project_id);
  std::lock_guard lock(p.mutex);
  if (p.stage == Stage::Sampled) {
    throw Error(ErrorCode::Lifecycle, "project " + p.id + " is already sampled; its corpus is fixed");
  }
  const corpus::SplitSizes s = sizes ? *sizes : corpus::default_split_sizes(corpus);
  corpus::Corpus split = corpus::balanced_split(corpus, s.train_n, s.test_n, seed);
  p.corpus_hash = sha256_hex(corpus::serialize(split));
  p.corpus = std::move(split);
  p.stage = Stage::CorpusLoaded;
  p.models.clear();
  p.reports.clear();
  persist(p, true);

  auto counts = [](const corpus::ClassCounts& c) {
    return json{{"positive", c.positive}, {"negative", c.negative}};
  };
  return json{{"project", p.id},
              {"stage", to_string(p.stage)},
              {"corpus_hash", p.corpus_hash},
              {"instances", p.corpus->size()},
              {"train", counts(p.corpus->counts(corpus::Split::Train))},
              {"test", counts(p.corpus->counts(corpus::Split::Test))},
              {"skipped_neutral", p.corpus->skipped_neutral},
              {"skipped_malformed", p.corpus->skipped_malformed}};
}

json Workbench::request_sample(const std::string& project_id, std::size_t m, std::uint64_t seed) {
  Project& p = project(project_id);
  std::lock_guard lock(p.mutex);
  const corpus::Corpus& c = p.require_corpus();
  if (!p.sessions.empty()) {
    throw Error(ErrorCode::Lifecycle, "project " + p.id + " already has sessions; its sample is fixed");
  }
  auto ids = textvec::representative_sample(c, m, seed, options_.sampling);
  p.sample = std::move(ids);
  p.sample_seed = seed;
  p.repo = knowledge::KnowledgeRepository::for_instances(c, p.sample);
  p.gold.clear();
  p.models.clear();
  p.reports.clear();
  p.stage = Stage::Sampled;
  persist(p, false);
  return json{{"project", p.id}, {"m", p.sample.size()}, {"seed", seed}, {"ids", p.sample}};
}

json Workbench::sample(const std::string& project_id) {
  Project& p = project(project_id);
  std::lock_guard lock(p.mutex);
  p.require_sampled();
  json instances = json::array();
  for (const auto& id : p.sample) instances.push_back(instance_json(*p.repo.find_instance(id)));
  return json{{"project", p.id}, {"m", p.sample.size()}, {"seed", p.sample_seed},
              {"ids", p.sample}, {"instances", std::move(instances)}};
}

json Workbench::set_gold_questions(const std::string& project_id, std::vector<GoldQuestion> questions) {
  Project& p = project(project_id);
  std::lock_guard lock(p.mutex);
  p.require_sampled();
  std::vector<Violation> violations;
  for (std::size_t i = 0; i < questions.size(); ++i) {
    const auto& q = questions[i];
    const std::string field = "questions[" + std::to_string(i) + "]";
    if (std::find(p.sample.begin(), p.sample.end(), q.instance_id) == p.sample.end()) {
      violations.push_back({"not_in_sample", "instance " + q.instance_id + " is not in the sample", field});
    }
    if (span_condition(q.condition) && q.expected_spans.empty()) {
      violations.push_back({"empty_spans", "span question has no expected spans", field});
    }
    if (!span_condition(q.condition) && q.must_contain.empty() && q.must_omit.empty()) {
      violations.push_back({"no_markers", "text question has no marker tokens", field});
    }
    for (std::size_t k = 0; k < i; ++k) {
      if (questions[k].instance_id == q.instance_id && questions[k].condition == q.condition) {
        violations.push_back({"duplicate_question", "duplicate question for " + q.instance_id, field});
      }
    }
  }
  if (!violations.empty()) {
    throw Error(ErrorCode::ValidationFailed, "gold questions rejected", std::move(violations));
  }
  p.gold = std::move(questions);
  persist(p, false);
  json out = json::array();
  for (const auto& q : p.gold) out.push_back(to_json(q));
  return json{{"project", p.id}, {"gold_questions", std::move(out)}};
}

json Workbench::set_project_taxonomy(const std::string& project_id, knowledge::Taxonomy t) {
  Project& p = project(project_id);
  std::lock_guard lock(p.mutex);
  p.require_sampled();
  if (trim(t.author).empty()) t.author = "project";
  p.repo.set_taxonomy(t);
  persist(p, false);
  return json{{"project", p.id}, {"taxonomy", knowledge::to_json(t)}, {"revision", p.repo.revision()}};
}

json Workbench::open_session(const std::string& project_id, const std::string& worker,
                             std::optional<Condition> condition) {
  Project& p = project(project_id);
  std::lock_guard lock(p.mutex);
  p.require_sampled();
  if (trim(worker).empty()) throw Error(ErrorCode::InvalidArgument, "worker id is required");

  Session s;
  s.id = p.id + "-s" + std::to_string(p.sessions.size() + 1);
  s.project_id = p.id;
  s.worker = worker;
  if (condition) {
    s.condition = *condition;
  } else {
    s.condition = kAllConditions[p.round_robin++ % std::size(kAllConditions)];
  }
  s.queue = p.sample;
  for (const auto& q : p.gold) {
    if (q.condition == s.condition) s.gold.push_back(q.instance_id);
  }
  if (s.gold.empty()) s.qualification = Qualification::Passed;
  p.sessions.push_back(s);
  persist(p, false);
  return session_json(s);
}

json Workbench::session_status(const std::string& session_id) {
  auto [p, s] = session(session_id);
  std::lock_guard lock(p.mutex);
  return session_json(s);
}

json Workbench::next_task(const std::string& session_id) {
  auto [p, s] = session(session_id);
  std::lock_guard lock(p.mutex);
  const json progress{{"completed", s.completed.size()}, {"total", s.queue.size()}};
  switch (s.qualification) {
    case Qualification::Failed:
      throw Error(ErrorCode::SessionLocked, "session " + s.id + " failed qualification");
    case Qualification::Pending: {
      json questions = json::array();
      for (const auto& id : s.gold) questions.push_back(instance_json(*p.repo.find_instance(id)));
      return json{{"kind", "qualification"}, {"session", s.id}, {"condition", to_string(s.condition)},
                  {"questions", std::move(questions)}, {"progress", progress}};
    }
    case Qualification::Passed:
      break;
  }
  for (const auto& id : s.queue) {
    if (s.completed.contains(id)) continue;
    const auto* inst = p.repo.find_instance(id);
    const knowledge::Taxonomy* tax = p.repo.taxonomy_for(s.worker);
    json task{{"kind", "justification"}, {"session", s.id}, {"condition", to_string(s.condition)},
              {"instance", instance_json(*inst)}, {"progress", progress}};
    if (tax) task["taxonomy"] = knowledge::to_json(*tax);
    return task;
  }
  return json{{"kind", "done"}, {"session", s.id}, {"condition", to_string(s.condition)},
              {"progress", progress}};
}

bool Workbench::grade(const Project& p, const GoldQuestion& q, const knowledge::Justification& answer) const {
  if (answer.condition() != q.condition) return false;
  const auto* inst = p.repo.find_instance(q.instance_id);
  if (!inst) return false;
  if (span_condition(q.condition)) {
    const auto tokens = textvec::tokenize(inst->text);
    const auto expected = covered_tokens(tokens, q.expected_spans);
    const auto given = covered_tokens(tokens, answer_spans(answer));
    std::size_t common = 0;
    for (auto i : given) common += expected.contains(i);
    const std::size_t unioned = expected.size() + given.size() - common;
    return unioned > 0 &&
           static_cast<double>(common) >= options_.jaccard_threshold * static_cast<double>(unioned);
  }
  const auto words = textvec::token_strings(answer_text(answer));
  const std::set<std::string> present(words.begin(), words.end());
  for (const auto& t : q.must_contain) {
    if (!present.contains(t)) return false;
  }
  for (const auto& t : q.must_omit) {
    if (present.contains(t)) return false;
  }
  return true;
}

json Workbench::check_qualification(const std::string& session_id,
                                    const std::vector<knowledge::Justification>& answers) {
  auto [p, s] = session(session_id);
  std::lock_guard lock(p.mutex);
  if (s.qualification == Qualification::Failed) {
    throw Error(ErrorCode::SessionLocked, "session " + s.id + " failed qualification");
  }
  if (s.qualification == Qualification::Passed) {
    throw Error(ErrorCode::Lifecycle, "session " + s.id + " is already qualified");
  }
  std::size_t correct = 0;
  for (const auto& id : s.gold) {
    auto a = std::find_if(answers.begin(), answers.end(),
                          [&](const knowledge::Justification& j) { return j.instance_id == id; });
    if (a == answers.end()) {
      throw Error(ErrorCode::InvalidArgument, "no answer for test question on " + id);
    }
    auto q = std::find_if(p.gold.begin(), p.gold.end(), [&](const GoldQuestion& g) {
      return g.instance_id == id && g.condition == s.condition;
    });
    if (q != p.gold.end() && grade(p, *q, *a)) ++correct;
  }
  s.gold_correct = correct;
  s.qualification = correct * 2 > s.gold.size() ? Qualification::Passed : Qualification::Failed;
  spdlog::info("session {}: {} of {} test questions correct; {}", s.id, correct, s.gold.size(),
               to_string(s.qualification));
  persist(p, false);
  return json{{"session", s.id}, {"qualification", to_string(s.qualification)},
              {"correct", correct}, {"total", s.gold.size()}};
}

json Workbench::submit_justification(const std::string& session_id, knowledge::Justification j) {
  auto [p, s] = session(session_id);
  std::lock_guard lock(p.mutex);
  if (s.qualification == Qualification::Failed) {
    throw Error(ErrorCode::SessionLocked, "session " + s.id + " failed qualification");
  }
  if (s.qualification == Qualification::Pending) {
    throw Error(ErrorCode::Lifecycle, "session " + s.id + " has not answered its test questions");
  }
  if (j.condition() != s.condition) {
    throw Error(ErrorCode::ConditionMismatch, std::string(to_string(j.condition())) +
                                                  " record submitted to a " +
                                                  std::string(to_string(s.condition)) + " session");
  }
  if (std::find(s.queue.begin(), s.queue.end(), j.instance_id) == s.queue.end()) {
    throw Error(ErrorCode::OutOfQueue, "instance " + j.instance_id + " is not in session " + s.id + "'s queue");
  }
  j.author = s.worker;
  const auto result = p.repo.add_justification(j);
  s.completed.insert(j.instance_id);
  persist(p, false);
  return json{{"accepted", true},
              {"session", s.id},
              {"warnings", result.warnings},
              {"revision", p.repo.revision()},
              {"progress", {{"completed", s.completed.size()}, {"total", s.queue.size()}}}};
}

json Workbench::submit_taxonomy(const std::string& session_id, knowledge::Taxonomy t) {
  auto [p, s] = session(session_id);
  std::lock_guard lock(p.mutex);
  if (s.qualification == Qualification::Failed) {
    throw Error(ErrorCode::SessionLocked, "session " + s.id + " failed qualification");
  }
  if (s.qualification == Qualification::Pending) {
    throw Error(ErrorCode::Lifecycle, "session " + s.id + " has not answered its test questions");
  }
  t.author = s.worker;
  p.repo.set_taxonomy(t);
  persist(p, false);
  return json{{"accepted", true}, {"session", s.id}, {"revision", p.repo.revision()}};
}

eval::EvalReport Workbench::compile_and_evaluate(const std::string& project_id, std::string_view condition) {
  const Condition c = parse_condition(condition);
  Project& p = project(project_id);
  std::lock_guard lock(p.mutex);
  const corpus::Corpus& corpus = p.require_corpus();
  const rules::RuleModel model = rules::compile(p.repo, c);
  eval::EvalReport report = eval::evaluate(model, corpus, corpus::Split::Test);
  const std::string tag(to_string(c));
  p.models[tag] = rules::serialize_model(model);
  p.reports[tag] = report;
  persist(p, false);
  return report;
}

std::string Workbench::export_repository(const std::string& project_id) {
  Project& p = project(project_id);
  std::lock_guard lock(p.mutex);
  return knowledge::export_repository(p.repo);
}

}  // namespace elicit::server
