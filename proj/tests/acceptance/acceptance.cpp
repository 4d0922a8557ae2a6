// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failures, so ctest fails when any criterion does.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "elicit/rng.hpp"
#include "elicit/server.hpp"

#include <spdlog/spdlog.h>

using namespace elicit;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr auto P = Polarity::Positive;
constexpr auto N = Polarity::Negative;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      detail = what;
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

corpus::Corpus balanced_test(std::size_t per_class) {
  corpus::Corpus c;
  for (std::size_t i = 0; i < 2 * per_class; ++i) {
    const bool pos = i % 2 == 0;
    c.instances.push_back({corpus::make_instance_id(i), pos ? "good" : "bad", pos ? P : N, pos ? 5 : 1,
                           corpus::Split::Test});
  }
  c.balanced = true;
  return c;
}

corpus::Corpus train_corpus(const std::vector<std::string>& texts) {
  corpus::Corpus c;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    c.instances.push_back({corpus::make_instance_id(i), texts[i], i % 2 ? N : P, i % 2 ? 1 : 5,
                           corpus::Split::Train});
  }
  return c;
}

Outcome trivial_baseline() {
  Outcome o;
  const corpus::Corpus c = balanced_test(1000);
  const auto t0 = Clock::now();
  const eval::EvalReport r = eval::trivial_baseline(c);
  const double secs = seconds_since(t0);
  constexpr double tol = 0.0005;
  o.require(std::abs(r.positive.precision - 0.5) <= tol, "positive P");
  o.require(std::abs(r.positive.recall - 1.0) <= tol, "positive R");
  o.require(std::abs(r.positive.f1 - 0.667) <= tol, "positive F");
  o.require(r.negative.precision == 0 && r.negative.recall == 0 && r.negative.f1 == 0, "negative row");
  o.require(std::abs(r.deltas.precision - 0.5) <= tol && std::abs(r.deltas.recall - 1.0) <= tol &&
                std::abs(r.deltas.f1 - 0.667) <= tol,
            "deltas");
  o.require(r.test_size == 2000, "test size");
  o.require(secs < 1.0, "runtime " + fmt("%.3f s", secs));
  if (o.pass) o.detail = "P/R/F 0.500/1.000/0.667 on 2000 instances in " + fmt("%.3f s", secs);
  return o;
}

Outcome sampling() {
  Outcome o;
  const auto t0 = Clock::now();

  const corpus::Corpus small = train_corpus({"red apple", "green pear", "blue plum", "red pear", "ripe fig"});
  auto all = textvec::representative_sample(small, 5, 3);
  std::sort(all.begin(), all.end());
  std::vector<std::string> ids;
  for (const auto& i : small.instances) ids.push_back(i.id);
  o.require(all == ids, "m = split size does not return the whole split");

  std::vector<std::string> texts;
  Rng rng(12);
  const std::vector<std::string> words{"pizza", "crust", "waiter", "rude", "tasty", "cold", "sushi", "fresh",
                                       "price", "cheap", "music", "loud", "patio", "wine", "dessert", "slow"};
  for (int i = 0; i < 200; ++i) {
    std::string t;
    for (int j = 0; j < 6; ++j) t += words[rng.below(words.size())] + " ";
    texts.push_back(t);
  }
  const corpus::Corpus big = train_corpus(texts);
  const auto first = textvec::representative_sample(big, 10, 77);
  for (int run = 1; run < 10; ++run) {
    o.require(textvec::representative_sample(big, 10, 77) == first, "run " + std::to_string(run) + " differs");
  }

  const std::vector<std::string> planted{"pizza pizza crust", "pizza crust",  "pizza crust crust",
                                         "waiter rude slow",  "waiter rude",  "waiter slow slow",
                                         "sushi fresh fish",  "sushi fish",   "sushi sushi fresh"};
  const auto picks = textvec::representative_sample(train_corpus(planted), 3, 5);
  std::set<std::size_t> groups;
  for (const auto& id : picks) groups.insert(std::stoul(id.substr(5)) / 3);
  o.require(groups.size() == 3, "planted groups not covered once each");

  const double secs = seconds_since(t0);
  o.require(secs < 1.0, "runtime " + fmt("%.3f s", secs));
  if (o.pass) o.detail = "identity, 10 identical runs, 3/3 planted groups in " + fmt("%.3f s", secs);
  return o;
}

Outcome tfidf_oracle() {
  Outcome o;
  const std::vector<std::string> docs{"the pasta was great great", "great service", "the soup was cold",
                                      "cold pasta and cold soup", "service was slow"};
  const auto model = textvec::TfidfModel::fit(docs);
  std::vector<std::vector<std::string>> toks;
  std::set<std::string> vocab;
  for (const auto& d : docs) {
    toks.push_back(textvec::token_strings(d));
    vocab.insert(toks.back().begin(), toks.back().end());
  }
  const double n = static_cast<double>(docs.size());
  double worst = 0.0;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    std::map<std::string, double> w;
    double norm = 0.0;
    for (const auto& term : vocab) {
      const double tf = static_cast<double>(std::count(toks[d].begin(), toks[d].end(), term));
      if (tf == 0) continue;
      double df = 0;
      for (const auto& t : toks) df += std::find(t.begin(), t.end(), term) != t.end();
      w[term] = tf * (std::log((1 + n) / (1 + df)) + 1);
      norm += w[term] * w[term];
    }
    norm = std::sqrt(norm);
    const auto v = model.transform(docs[d]);
    for (const auto& term : vocab) {
      const double expect = w.count(term) ? w[term] / norm : 0.0;
      worst = std::max(worst, std::abs(v.weight(model.vocabulary().at(term)) - expect));
    }
  }
  o.require(worst <= 1e-9, "max component error " + fmt("%.3g", worst));
  if (o.pass) o.detail = "max component error " + fmt("%.3g", worst) + " (tolerance 1e-9)";
  return o;
}

Outcome kmeans_monotonicity() {
  Outcome o;
  Rng rng(2024);
  std::size_t steps = 0;
  for (int fixture = 0; fixture < 100 && o.pass; ++fixture) {
    const std::size_t n = 2 + rng.below(99);
    const std::size_t dim = 2 + rng.below(15);
    std::vector<textvec::SparseVector> pts(n);
    for (auto& p : pts) {
      for (std::size_t c = 0; c < dim; ++c) {
        if (rng.below(3) == 0) p.entries.emplace_back(c, rng.unit());
      }
    }
    const std::size_t k = 1 + rng.below(std::min<std::size_t>(8, n));
    const auto cl = textvec::kmeans(pts, k, rng.next());
    for (std::size_t i = 1; i < cl.objective_history.size(); ++i, ++steps) {
      o.require(cl.objective_history[i] <= cl.objective_history[i - 1],
                "fixture " + std::to_string(fixture) + " step " + std::to_string(i) + " increased by " +
                    fmt("%.3g", cl.objective_history[i] - cl.objective_history[i - 1]));
    }
  }
  if (o.pass) o.detail = "100 fixtures, " + std::to_string(steps) + " iterations, none increased";
  return o;
}

struct SignalCase {
  std::string text;
  Polarity label;
  std::vector<std::tuple<std::optional<std::string>, std::string, bool, Polarity>> expect;
};

Outcome pattern_fixtures() {
  Outcome o;
  const std::vector<SignalCase> cases{
      {"our server was kind", P, {{"server", "kind", false, P}}},
      {"our server was not kind", P, {{"server", "kind", true, N}}},
      {"our server was rude", N, {{"server", "rude", false, N}}},
      {"There were delicious burgers", P, {{"burgers", "delicious", false, P}}},
      {"There were disgusting burgers", N, {{"burgers", "disgusting", false, N}}},
      {"The cake was rich and moist", P, {{"cake", "rich", false, P}, {"cake", "moist", false, P}}},
  };
  std::size_t matched = 0;
  for (const auto& c : cases) {
    const auto got = rules::extract_signals(c.text, c.label);
    bool ok = got.size() == c.expect.size();
    for (std::size_t i = 0; ok && i < got.size(); ++i) {
      const auto& [noun, adj, neg, pol] = c.expect[i];
      ok = got[i].noun == noun && got[i].adjective == adj && got[i].negated == neg && got[i].polarity == pol;
    }
    o.require(ok, "\"" + c.text + "\"");
    matched += ok;
  }
  o.detail = std::to_string(matched) + "/" + std::to_string(cases.size()) + " sentences" +
             (o.pass ? "" : "; first mismatch " + o.detail);
  return o;
}

Outcome perturbation_duality() {
  Outcome o;
  const std::vector<std::tuple<std::string, Polarity, std::string>> fixtures{
      {"There were delicious burgers", P, "There were disgusting burgers"},
      {"our server was kind", P, "our server was rude"},
      {"our server was kind", P, "our server was not kind"},
      {"The soup was cold", N, "The soup was hot"},
      {"The waiter was slow and rude", N, "The waiter was quick and polite"},
      {"Tasty noodles", P, "Bland noodles"},
      {"The price was fair", P, "The price was outrageous"},
  };
  std::size_t ok_count = 0;
  for (std::size_t i = 0; i < fixtures.size(); ++i) {
    const auto& [orig, label, edited] = fixtures[i];
    rules::InstanceMap inst{{"a", {"a", orig, label}}};
    const std::vector<knowledge::Justification> js{{"a", label, "w", knowledge::Perturbation{edited}}};
    const auto model = rules::compile_perturbation(js, inst);
    const bool ok = rules::classify(model, orig).label == label &&
                    rules::classify(model, edited).label == opposite(label);
    o.require(ok, "\"" + orig + "\" -> \"" + edited + "\"");
    ok_count += ok;
  }
  o.detail = std::to_string(ok_count) + "/" + std::to_string(fixtures.size()) + " substitutions" +
             (o.pass ? "" : "; first failure " + o.detail);
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Builds the mini-fixture repository in-process, independent of the CLI.
knowledge::KnowledgeRepository mini_repository() {
  const fs::path dir = fs::path(ELICIT_FIXTURE_DIR) / "mini";
  std::istringstream in(slurp(dir / "reviews.jsonl"));
  const corpus::Corpus c = corpus::balanced_split(corpus::ingest_jsonl(in, 7), 20, 10, 7);
  const auto ids = textvec::representative_sample(c, 10, 7);
  auto repo = knowledge::KnowledgeRepository::for_instances(c, ids);
  const json taxonomies = json::parse(slurp(dir / "taxonomy.json"));
  for (const auto& t : taxonomies["taxonomies"]) repo.set_taxonomy(knowledge::taxonomy_from_json(t));
  const json justifications = json::parse(slurp(dir / "justifications.json"));
  for (const auto& j : justifications["justifications"]) {
    repo.add_justification(knowledge::justification_from_json(j));
  }
  return repo;
}

Outcome provenance_audit() {
  Outcome o;
  std::vector<std::pair<std::string, knowledge::KnowledgeRepository>> repos;
  repos.emplace_back("mini", mini_repository());

  knowledge::KnowledgeRepository extra("h");
  extra.add_instance({"a", "The cake was rich and moist", P});
  extra.add_instance({"b", "There were delicious burgers", P});
  extra.add_instance({"c", "Our server was rude, over-hyped place", N});
  extra.set_taxonomy({"w", {{"food", {"tasty"}}, {"service", {"slow"}}}, ""});
  extra.add_justification({"c", N, "w", knowledge::BagOfWords{{{21, 31}, {4, 10}}}});
  extra.add_justification({"b", P, "w", knowledge::Perturbation{"There were disgusting burgers"}});
  extra.add_justification({"a", P, "w", knowledge::Simplification{"cake was rich and moist"}});
  extra.add_justification({"a", P, "w", knowledge::ConceptBagOfWords{{{"food", "tasty", {{4, 8}, {13, 17}}}}}});
  extra.add_justification({"a", P, "w", knowledge::ConceptAnnotation{{{"food", "tasty", {{4, 8}}, {{13, 27}}}}}});
  repos.emplace_back("unit", std::move(extra));

  std::size_t models = 0, entries = 0;
  for (const auto& [name, repo] : repos) {
    for (Condition c : kAllConditions) {
      rules::RuleModel model;
      try {
        model = rules::compile(repo, c);
      } catch (const Error& e) {
        o.require(false, name + "/" + std::string(to_string(c)) + ": " + e.what());
        continue;
      }
      ++models;
      entries += model.nouns.size() + model.adjectives.size() + model.keywords.size();
      const auto failures = rules::audit_provenance(model, repo);
      o.require(failures.empty(), name + "/" + std::string(to_string(c)) + ": " +
                                      (failures.empty() ? "" : failures.front()));
    }
  }
  if (o.pass) {
    o.detail = std::to_string(models) + " models, " + std::to_string(entries) + " lexicon entries traced";
  }
  return o;
}

Outcome metric_oracle() {
  Outcome o;
  // A keyword model whose predictions are fixed by the instance text:
  // "pos" -> Positive, "neg" -> Negative, "zzz" -> abstain.
  rules::RuleModel model;
  model.condition = Condition::Bow;
  model.keywords["pos"] = {P, {}};
  model.keywords["neg"] = {N, {}};
  Rng rng(99);
  for (int trial = 0; trial < 1000 && o.pass; ++trial) {
    corpus::Corpus c;
    const std::size_t n = 1 + rng.below(30);
    std::vector<std::optional<Polarity>> pred;
    for (std::size_t i = 0; i < n; ++i) {
      const Polarity gold = rng.below(2) ? P : N;
      const auto r = rng.below(3);
      pred.push_back(r == 0 ? std::nullopt : std::optional<Polarity>(r == 1 ? P : N));
      c.instances.push_back({corpus::make_instance_id(i), r == 0 ? "zzz" : (r == 1 ? "pos" : "neg"), gold,
                             gold == P ? 5 : 1, corpus::Split::Test});
    }
    const eval::EvalReport got = eval::evaluate(model, c);
    auto brute = [&](Polarity cls) {
      std::size_t tp = 0, fp = 0, total = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const bool gold = c.instances[i].label == cls;
        total += gold;
        tp += gold && pred[i] == cls;
        fp += !gold && pred[i] == cls;
      }
      const double p = tp + fp ? double(tp) / double(tp + fp) : 0.0;
      const double r = total ? double(tp) / double(total) : 0.0;
      return eval::ClassMetrics{p, r, p + r > 0 ? 2 * p * r / (p + r) : 0.0, tp + fp == 0, total == 0};
    };
    const auto bp = brute(P);
    const auto bn = brute(N);
    std::size_t abst = 0;
    for (const auto& x : pred) abst += !x;
    o.require(got.positive == bp && got.negative == bn && got.abstentions == abst && got.test_size == n &&
                  got.deltas.precision == std::abs(bp.precision - bn.precision) &&
                  got.deltas.recall == std::abs(bp.recall - bn.recall) &&
                  got.deltas.f1 == std::abs(bp.f1 - bn.f1),
              "trial " + std::to_string(trial));
  }
  if (o.pass) o.detail = "1000 random prediction sets, exact";
  return o;
}

Outcome kappa_and_coverage() {
  Outcome o;
  const double perfect = knowledge::fleiss_kappa({{{"pos", "pos", "pos"}, {"neg", "neg", "neg"}}});
  o.require(perfect == 1.0, "perfect agreement gave " + fmt("%.17g", perfect));
  const double single = knowledge::fleiss_kappa({{{"x", "x"}, {"x", "x"}}});
  o.require(single == 1.0, "single category gave " + fmt("%.17g", single));
  // P-bar = 2/3, Pe = 1/2 -> kappa = 1/3.
  const double k = knowledge::fleiss_kappa({{{"A", "A"}, {"B", "B"}, {"A", "B"}}});
  o.require(std::abs(k - 1.0 / 3.0) <= 1e-12, "3x2 fixture gave " + fmt("%.17g", k));

  const knowledge::Taxonomy t{"j", {{"food", {"tasty"}}, {"service", {"slow"}}}, ""};
  std::vector<std::optional<std::string>> a;
  for (int i = 0; i < 36; ++i) a.push_back(i < 25 ? std::optional<std::string>(i % 2 ? "food" : "service") : std::nullopt);
  const double cov = knowledge::taxonomy_coverage(t, a);
  o.require(std::abs(cov - 0.6944) <= 1e-4, "coverage " + fmt("%.6f", cov));
  if (o.pass) o.detail = "kappa 1.0 / 1.0 / " + fmt("%.15f", k) + ", coverage " + fmt("%.4f", cov);
  return o;
}

Outcome end_to_end() {
  Outcome o;
  const fs::path mini = fs::path(ELICIT_FIXTURE_DIR) / "mini";
  const fs::path work = fs::temp_directory_path() / ("elicit-acceptance-" + std::to_string(Rng(std::random_device{}()).next()));
  fs::create_directories(work);
  const std::string bin = ELICIT_CLI_PATH;
  auto w = [&](const char* f) { return "'" + (work / f).string() + "'"; };
  const std::vector<std::string> steps{
      "ingest --input '" + (mini / "reviews.jsonl").string() + "' --seed 7 --train-n 20 --test-n 10 --out " +
          w("corpus.json"),
      "sample --corpus " + w("corpus.json") + " --m 10 --seed 7 --out " + w("sample.json"),
      "validate --corpus " + w("corpus.json") + " --sample " + w("sample.json") + " --justifications '" +
          (mini / "justifications.json").string() + "' --taxonomy '" + (mini / "taxonomy.json").string() +
          "' --out " + w("repository.json"),
      "eval --corpus " + w("corpus.json") + " --repository " + w("repository.json") +
          " --condition all --out " + w("report.txt"),
  };
  const auto t0 = Clock::now();
  for (const auto& s : steps) {
    const int rc = std::system((bin + " " + s + " > /dev/null 2>&1").c_str());
    o.require(rc == 0, "step failed: " + s.substr(0, s.find(' ')));
    if (!o.pass) break;
  }
  const double secs = seconds_since(t0);
  if (o.pass) {
    const std::string report = slurp(work / "report.txt");
    const std::string golden = slurp(fs::path(ELICIT_GOLDEN_DIR) / "mini_report.txt");
    std::size_t rows = 0;
    for (const char* name : {"Trivial (Always Pos)", "Bag of Words", "Perturbation", "Simplification",
                             "Concept Bag of Words", "Concept Annotation"}) {
      rows += report.find(std::string(name) + " ") != std::string::npos;
    }
    o.require(rows == 6, "table has " + std::to_string(rows) + " of 6 rows");
    o.require(report == golden, "report differs from golden");
    o.require(secs < 10.0, "runtime " + fmt("%.2f s", secs));
  }
  fs::remove_all(work);
  if (o.pass) o.detail = "six-row table matches golden byte-for-byte in " + fmt("%.2f s", secs);
  return o;
}

Outcome qualification_gate() {
  Outcome o;
  server::Workbench wb;
  const std::string pid = wb.create_project()["id"];
  std::vector<corpus::RawReview> records;
  for (int i = 0; i < 40; ++i) {
    records.push_back({std::string(i % 2 ? "The soup was cold " : "The soup was tasty ") + std::to_string(i),
                       i % 2 ? 1 : 5});
  }
  wb.upload_corpus(pid, corpus::ingest(records, 0), std::nullopt, 1);
  const json sample = wb.request_sample(pid, 8, 1);
  const std::vector<std::string> ids = sample["ids"];
  const json full = wb.sample(pid);
  std::map<std::string, json> inst;
  for (const auto& i : full["instances"]) inst[i["id"]] = i;

  std::vector<server::GoldQuestion> gold;
  for (int i = 0; i < 5; ++i) gold.push_back({ids[i], Condition::Bow, {{13, 18}}, {}, {}});
  wb.set_gold_questions(pid, gold);

  auto answers = [&](int correct) {
    std::vector<knowledge::Justification> out;
    for (int i = 0; i < 5; ++i) {
      const knowledge::Span s = i < correct ? knowledge::Span{13, 18} : knowledge::Span{0, 3};
      out.push_back({ids[i], parse_polarity(inst[ids[i]]["label"].get<std::string>()), "",
                     knowledge::BagOfWords{{s}}});
    }
    return out;
  };
  const std::string pass_id = wb.open_session(pid, "p", Condition::Bow)["id"];
  const std::string fail_id = wb.open_session(pid, "f", Condition::Bow)["id"];
  o.require(wb.check_qualification(pass_id, answers(3))["qualification"] == "passed", "3 of 5 did not pass");
  o.require(wb.check_qualification(fail_id, answers(2))["qualification"] == "failed", "2 of 5 did not fail");

  const auto& text = inst[ids[5]]["text"].get_ref<const std::string&>();
  const knowledge::Justification task{ids[5], parse_polarity(inst[ids[5]]["label"].get<std::string>()), "",
                                      knowledge::BagOfWords{{{0, text.size()}}}};
  bool locked = false;
  try {
    wb.submit_justification(fail_id, task);
  } catch (const Error& e) {
    locked = e.code() == ErrorCode::SessionLocked;
  }
  o.require(locked, "failed session accepted a submission");
  bool accepted = false;
  try {
    accepted = wb.submit_justification(pass_id, task)["accepted"] == true;
  } catch (const Error&) {
  }
  o.require(accepted, "passed session rejected a valid submission");
  if (o.pass) o.detail = "3/5 passed, 2/5 failed, post-failure submission rejected";
  return o;
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::err);
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"trivial-baseline", trivial_baseline},
      {"sampling-identity-determinism", sampling},
      {"tfidf-oracle", tfidf_oracle},
      {"kmeans-monotonicity", kmeans_monotonicity},
      {"pattern-fixtures", pattern_fixtures},
      {"perturbation-duality", perturbation_duality},
      {"provenance-audit", provenance_audit},
      {"metric-oracle", metric_oracle},
      {"fleiss-kappa-coverage", kappa_and_coverage},
      {"end-to-end-cli", end_to_end},
      {"qualification-gate", qualification_gate},
  };
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s  %-30s %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    failures += !o.pass;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures;
}
