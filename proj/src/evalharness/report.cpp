#include <algorithm>
#include <cstdio>

#include "elicit/evalharness.hpp"

namespace elicit::eval {

using nlohmann::json;

std::string display_name(std::string_view condition) {
  if (condition == kTrivialTag) return "Trivial (Always Pos)";
  if (auto c = try_parse_condition(condition)) {
    switch (*c) {
      case Condition::Bow: return "Bag of Words";
      case Condition::Perturbation: return "Perturbation";
      case Condition::Simplification: return "Simplification";
      case Condition::ConceptBow: return "Concept Bag of Words";
      case Condition::ConceptAnnotation: return "Concept Annotation";
    }
  }
  return std::string(condition);
}

namespace {

int rank(std::string_view condition) {
  if (condition == kTrivialTag) return -1;
  if (auto c = try_parse_condition(condition)) return static_cast<int>(*c);
  return 100;
}

std::string cell(double v, bool flagged) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.3f%c", v, flagged ? '*' : ' ');
  return buf;
}

}  // namespace

std::vector<EvalReport> ordered(std::vector<EvalReport> reports) {
  std::stable_sort(reports.begin(), reports.end(), [](const EvalReport& a, const EvalReport& b) {
    return rank(a.condition) < rank(b.condition);
  });
  return reports;
}

std::string render_table(std::vector<EvalReport> reports) {
  reports = ordered(std::move(reports));
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-22s | %-20s | %-20s | %-20s |\n", "", "Positive", "Negative",
                "Absolute Delta");
  out += line;
  std::snprintf(line, sizeof line, "%-22s | %-6s %-6s %-6s | %-6s %-6s %-6s | %-6s %-6s %-6s | %6s %7s\n",
                "Model", "P", "R", "F", "P", "R", "F", "P", "R", "F", "N", "Abstain");
  out += line;
  out += std::string(22, '-') + "-+-" + std::string(20, '-') + "-+-" + std::string(20, '-') +
         "-+-" + std::string(20, '-') + "-+-" + std::string(14, '-') + "\n";
  bool any_flag = false;
  for (const auto& r : reports) {
    const auto& p = r.positive;
    const auto& n = r.negative;
    any_flag = any_flag || p.predicted_nothing || n.predicted_nothing || p.no_gold || n.no_gold;
    std::snprintf(line, sizeof line,
                  "%-22s | %s %s %s | %s %s %s | %s %s %s | %6zu %7zu\n",
                  display_name(r.condition).c_str(), cell(p.precision, p.predicted_nothing).c_str(),
                  cell(p.recall, p.no_gold).c_str(), cell(p.f1, false).c_str(),
                  cell(n.precision, n.predicted_nothing).c_str(), cell(n.recall, n.no_gold).c_str(),
                  cell(n.f1, false).c_str(), cell(r.deltas.precision, false).c_str(),
                  cell(r.deltas.recall, false).c_str(), cell(r.deltas.f1, false).c_str(),
                  r.test_size, r.abstentions);
    out += line;
  }
  if (any_flag) out += "* undefined (0/0) ratio reported as 0\n";
  return out;
}

json to_json(const EvalReport& r) {
  auto metrics = [](const ClassMetrics& m) {
    return json{{"precision", m.precision},
                {"recall", m.recall},
                {"f1", m.f1},
                {"predicted_nothing", m.predicted_nothing},
                {"no_gold", m.no_gold}};
  };
  return json{{"condition", r.condition},
              {"positive", metrics(r.positive)},
              {"negative", metrics(r.negative)},
              {"deltas", {{"precision", r.deltas.precision},
                          {"recall", r.deltas.recall},
                          {"f1", r.deltas.f1}}},
              {"test_size", r.test_size},
              {"abstentions", r.abstentions},
              {"balanced", r.balanced}};
}

EvalReport report_from_json(const json& j) {
  try {
    auto metrics = [](const json& m) {
      return ClassMetrics{m.at("precision").get<double>(), m.at("recall").get<double>(),
                          m.at("f1").get<double>(), m.at("predicted_nothing").get<bool>(),
                          m.at("no_gold").get<bool>()};
    };
    EvalReport r;
    r.condition = j.at("condition").get<std::string>();
    r.positive = metrics(j.at("positive"));
    r.negative = metrics(j.at("negative"));
    const json& d = j.at("deltas");
    r.deltas = Deltas{d.at("precision").get<double>(), d.at("recall").get<double>(),
                      d.at("f1").get<double>()};
    r.test_size = j.at("test_size").get<std::size_t>();
    r.abstentions = j.at("abstentions").get<std::size_t>();
    r.balanced = j.at("balanced").get<bool>();
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("malformed report: ") + e.what());
  }
}

json reports_to_json(const std::vector<EvalReport>& reports) {
  json rows = json::array();
  for (const auto& r : ordered(reports)) rows.push_back(to_json(r));
  return json{{"reports", std::move(rows)}};
}

std::vector<EvalReport> reports_from_json(const json& doc) {
  std::vector<EvalReport> out;
  for (const auto& r : doc.at("reports")) out.push_back(report_from_json(r));
  return out;
}

}  // namespace elicit::eval
