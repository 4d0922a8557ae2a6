#include "elicit/cli.hpp"

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "elicit/server.hpp"

namespace elicit::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Config {
  std::string command;
  std::string input;
  std::string corpus;
  std::string sample;
  std::string repository;
  std::string justifications;
  std::string taxonomy;
  std::string condition;
  std::string out;
  std::string data_dir;
  std::string project;
  std::string host = "127.0.0.1";
  std::size_t m = 0;
  std::uint64_t seed = 0;
  std::optional<std::size_t> train_n;
  std::optional<std::size_t> test_n;
  double kmeans_tol = textvec::KMeansOptions{}.tol;
  std::size_t max_iter = textvec::KMeansOptions{}.max_iter;
  int port = 8080;
};

const std::vector<std::string> kCommands{"ingest", "sample", "validate", "compile", "eval", "export", "serve"};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& data) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !out.write(data.data(), static_cast<std::streamsize>(data.size()))) {
    throw Error(ErrorCode::Io, "cannot write " + path);
  }
}

std::string require(const std::string& value, const char* flag) {
  if (value.empty()) throw Error(ErrorCode::InvalidArgument, std::string("--") + flag + " is required");
  return value;
}

// Records what a run read and how, so its artifacts can be traced and reproduced.
class Manifest {
 public:
  explicit Manifest(std::string command) { doc_["command"] = std::move(command); }

  // Reads an input file and records its basename and content hash.
  std::string input(const std::string& path) {
    std::string data = read_file(path);
    doc_["inputs"].push_back({{"name", fs::path(path).filename().string()}, {"sha256", sha256_hex(data)}});
    return data;
  }

  void param(const std::string& key, json value) { doc_["parameters"][key] = std::move(value); }

  json finish() {
    doc_["versions"] = {{"tool", kToolVersion},
                        {"corpus_schema", corpus::kCorpusSchemaVersion},
                        {"repository_schema", knowledge::kRepositorySchemaVersion},
                        {"closed_class", rules::ClosedClassList::builtin().version()}};
    if (!doc_.contains("inputs")) doc_["inputs"] = json::array();
    if (!doc_.contains("parameters")) doc_["parameters"] = json::object();
    return doc_;
  }

  std::string hash() { return sha256_hex(finish().dump()); }

  // Writes `<out>.manifest.json` next to the artifact.
  void write_beside(const std::string& out) { write_file(out + ".manifest.json", finish().dump(2) + "\n"); }

 private:
  json doc_ = json::object();
};

void write_json_artifact(const std::string& out, json doc, Manifest& manifest) {
  doc["manifest_hash"] = manifest.hash();
  write_file(out, doc.dump(2) + "\n");
  manifest.write_beside(out);
}

// Repository files hash their whole content; the manifest hash goes in before
// the integrity hash is recomputed so a plain import still verifies.
void write_repository_artifact(const std::string& out, const std::string& exported, Manifest& manifest) {
  json doc = json::parse(exported);
  doc.erase("integrity");
  doc["manifest_hash"] = manifest.hash();
  doc["integrity"] = sha256_hex(doc.dump());
  write_file(out, doc.dump(2) + "\n");
  manifest.write_beside(out);
}

// Parses a JSON artifact, dropping the manifest hash the CLI embeds.
json parse_artifact(const std::string& text, const std::string& what) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorCode::Parse, what + " is not valid JSON");
  if (doc.is_object()) doc.erase("manifest_hash");
  return doc;
}

corpus::Corpus load_corpus(Manifest& m, const std::string& path) {
  return corpus::corpus_from_json(parse_artifact(m.input(path), path));
}

knowledge::KnowledgeRepository load_repository(Manifest& m, const std::string& path) {
  return knowledge::import_repository(m.input(path));
}

int cmd_ingest(const Config& c, std::ostream& out) {
  Manifest manifest("ingest");
  std::istringstream in(manifest.input(require(c.input, "input")));
  manifest.param("seed", c.seed);
  const corpus::Corpus raw = corpus::ingest_jsonl(in, c.seed);
  corpus::SplitSizes sizes = corpus::default_split_sizes(raw);
  if (c.train_n || c.test_n) {
    if (!c.train_n || !c.test_n) throw Error(ErrorCode::InvalidArgument, "--train-n and --test-n go together");
    sizes = {*c.train_n, *c.test_n};
  }
  manifest.param("train_n", sizes.train_n);
  manifest.param("test_n", sizes.test_n);
  const corpus::Corpus split = corpus::balanced_split(raw, sizes.train_n, sizes.test_n, c.seed);
  write_json_artifact(require(c.out, "out"), corpus::to_json(split), manifest);
  out << "ingested " << split.size() << " instances (" << split.skipped_neutral << " neutral, "
      << split.skipped_malformed << " malformed skipped); train " << sizes.train_n << ", test " << sizes.test_n
      << "\n";
  return 0;
}

int cmd_sample(const Config& c, std::ostream& out) {
  if (c.m < 1) throw Error(ErrorCode::InvalidM, "--m must be at least 1");
  Manifest manifest("sample");
  const corpus::Corpus corpus = load_corpus(manifest, require(c.corpus, "corpus"));
  textvec::SampleOptions opts;
  opts.kmeans.tol = c.kmeans_tol;
  opts.kmeans.max_iter = c.max_iter;
  manifest.param("m", c.m);
  manifest.param("seed", c.seed);
  manifest.param("kmeans_tol", c.kmeans_tol);
  manifest.param("max_iter", c.max_iter);
  manifest.param("restarts", opts.restarts);
  const auto ids = textvec::representative_sample(corpus, c.m, c.seed, opts);
  write_json_artifact(require(c.out, "out"), json{{"m", c.m}, {"seed", c.seed}, {"ids", ids}}, manifest);
  out << "sampled " << ids.size() << " instances\n";
  return 0;
}

std::vector<knowledge::Taxonomy> read_taxonomies(const json& doc) {
  std::vector<knowledge::Taxonomy> out;
  const json& list = doc.is_object() && doc.contains("taxonomies") ? doc["taxonomies"] : doc;
  if (list.is_array()) {
    for (const auto& t : list) out.push_back(knowledge::taxonomy_from_json(t));
  } else {
    out.push_back(knowledge::taxonomy_from_json(list));
  }
  return out;
}

int cmd_validate(const Config& c, std::ostream& out, std::ostream& err) {
  Manifest manifest("validate");
  const corpus::Corpus corpus = load_corpus(manifest, require(c.corpus, "corpus"));
  const json sample = parse_artifact(manifest.input(require(c.sample, "sample")), c.sample);
  const auto ids = sample.at("ids").get<std::vector<std::string>>();
  knowledge::KnowledgeRepository repo = knowledge::KnowledgeRepository::for_instances(corpus, ids);

  std::size_t rejected = 0;
  auto report = [&](const std::string& what, const Error& e) {
    ++rejected;
    err << what << ": " << e.what() << "\n";
    for (const auto& v : e.violations()) err << "  " << v.code << " [" << v.field << "] " << v.message << "\n";
  };

  if (!c.taxonomy.empty()) {
    for (auto& t : read_taxonomies(parse_artifact(manifest.input(c.taxonomy), c.taxonomy))) {
      const std::string who = "taxonomy by " + t.author;
      try {
        repo.set_taxonomy(std::move(t));
      } catch (const Error& e) {
        report(who, e);
      }
    }
  }
  const json justs = parse_artifact(manifest.input(require(c.justifications, "justifications")), c.justifications);
  const json& list = justs.is_object() ? justs.at("justifications") : justs;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string what = "justification " + std::to_string(i);
    try {
      const auto result = repo.add_justification(knowledge::justification_from_json(list[i]));
      for (const auto& w : result.warnings) err << what << ": warning: " << w << "\n";
    } catch (const Error& e) {
      report(what, e);
    }
  }
  if (rejected > 0) {
    err << rejected << " record(s) failed validation\n";
    return 1;
  }
  write_repository_artifact(require(c.out, "out"), knowledge::export_repository(repo), manifest);
  out << "validated " << repo.size() << " justifications and " << repo.taxonomies().size()
      << " taxonomies\n";
  return 0;
}

int cmd_compile(const Config& c, std::ostream& out) {
  Manifest manifest("compile");
  const auto repo = load_repository(manifest, require(c.repository, "repository"));
  const Condition cond = parse_condition(require(c.condition, "condition"));
  manifest.param("condition", to_string(cond));
  const auto model = rules::compile(repo, cond);
  write_json_artifact(require(c.out, "out"), rules::to_json(model), manifest);
  out << "compiled " << to_string(cond) << ": " << model.nouns.size() << " nouns, " << model.adjectives.size()
      << " adjectives, " << model.keywords.size() << " keywords\n";
  return 0;
}

int cmd_eval(const Config& c, std::ostream& out) {
  Manifest manifest("eval");
  const corpus::Corpus corpus = load_corpus(manifest, require(c.corpus, "corpus"));
  const auto repo = load_repository(manifest, require(c.repository, "repository"));
  const std::string which = require(c.condition, "condition");
  manifest.param("condition", which);

  std::vector<Condition> conditions;
  if (which == "all") {
    conditions.assign(std::begin(kAllConditions), std::end(kAllConditions));
  } else {
    conditions.push_back(parse_condition(which));
  }
  std::vector<eval::EvalReport> reports{eval::trivial_baseline(corpus)};
  for (Condition cond : conditions) reports.push_back(eval::evaluate(rules::compile(repo, cond), corpus));

  const std::string path = require(c.out, "out");
  if (fs::path(path).extension() == ".json") {
    write_json_artifact(path, eval::reports_to_json(reports), manifest);
  } else {
    write_file(path, eval::render_table(reports) + "manifest " + manifest.hash() + "\n");
    manifest.write_beside(path);
  }
  out << eval::render_table(reports);
  return 0;
}

int cmd_export(const Config& c, std::ostream& out) {
  Manifest manifest("export");
  std::string doc;
  if (!c.data_dir.empty()) {
    server::Workbench wb(server::WorkbenchOptions{c.data_dir});
    manifest.param("project", require(c.project, "project"));
    doc = wb.export_repository(c.project);
  } else {
    doc = knowledge::export_repository(load_repository(manifest, require(c.repository, "repository")));
  }
  const std::string path = require(c.out, "out");
  write_repository_artifact(path, doc, manifest);
  out << "exported repository to " << path << "\n";
  return 0;
}

server::HttpServer* g_server = nullptr;

extern "C" void stop_server(int) {
  if (g_server) g_server->stop();
}

int cmd_serve(const Config& c, std::ostream& out) {
  server::WorkbenchOptions opts;
  opts.data_dir = c.data_dir;
  opts.sampling.kmeans.tol = c.kmeans_tol;
  opts.sampling.kmeans.max_iter = c.max_iter;
  server::Workbench wb(opts);
  server::HttpServer http(wb);
  const int port = http.bind(c.host, c.port);
  if (port < 0) throw Error(ErrorCode::Io, "cannot bind " + c.host + ":" + std::to_string(c.port));
  out << "listening on http://" << c.host << ":" << port << "\n" << std::flush;
  g_server = &http;
  std::signal(SIGINT, stop_server);
  std::signal(SIGTERM, stop_server);
  http.listen();
  g_server = nullptr;
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  // Diagnostics go to stderr so stdout carries only command output.
  static const bool logger_ready = [] {
    spdlog::set_default_logger(spdlog::stderr_color_mt("elicit"));
    return true;
  }();
  (void)logger_ready;

  Config c;
  CLI::App app{"Knowledge elicitation pipeline: ingest, sample, validate, compile, eval, export, serve", "elicit"};
  app.set_config("--config", "", "flat key = value file; command-line flags win");
  app.add_option("command", c.command, "one of: ingest sample validate compile eval export serve")
      ->required()
      ->check(CLI::IsMember(kCommands));
  app.add_option("--input", c.input, "review file, one JSON {text, stars} per line");
  app.add_option("--corpus", c.corpus, "corpus file written by ingest");
  app.add_option("--sample", c.sample, "sample file written by sample");
  app.add_option("--repository", c.repository, "repository file");
  app.add_option("--justifications", c.justifications, "justification records (JSON)");
  app.add_option("--taxonomy", c.taxonomy, "taxonomy or list of taxonomies (JSON)");
  app.add_option("--condition", c.condition, "condition tag, or 'all' for eval");
  app.add_option("--out", c.out, "artifact to write");
  app.add_option("--m", c.m, "number of representative instances");
  app.add_option("--seed", c.seed, "random seed");
  app.add_option("--train-n", c.train_n, "train split size (even)");
  app.add_option("--test-n", c.test_n, "test split size (even)");
  app.add_option("--kmeans-tol", c.kmeans_tol, "k-means centroid shift tolerance");
  app.add_option("--max-iter", c.max_iter, "k-means iteration cap");
  app.add_option("--data-dir", c.data_dir, "server project store directory");
  app.add_option("--project", c.project, "project id for export from a data directory");
  app.add_option("--host", c.host, "serve: address to bind");
  app.add_option("--port", c.port, "serve: port (0 picks a free one)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n" << "run with --help for usage\n";
    return 2;
  }

  try {
    if (c.command == "ingest") return cmd_ingest(c, out);
    if (c.command == "sample") return cmd_sample(c, out);
    if (c.command == "validate") return cmd_validate(c, out, err);
    if (c.command == "compile") return cmd_compile(c, out);
    if (c.command == "eval") return cmd_eval(c, out);
    if (c.command == "export") return cmd_export(c, out);
    return cmd_serve(c, out);
  } catch (const Error& e) {
    err << "error (" << to_string(e.code()) << "): " << e.what() << "\n";
    for (const auto& v : e.violations()) err << "  " << v.code << " [" << v.field << "] " << v.message << "\n";
    return 1;
  } catch (const json::exception& e) {
    err << "error (parse): " << e.what() << "\n";
    return 1;
  }
}

}  // namespace elicit::cli
