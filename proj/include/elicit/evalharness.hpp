#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "elicit/corpus.hpp"
#include "elicit/rulemodel.hpp"

namespace elicit::eval {

struct ClassCounts {
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;  // includes abstentions on this class
  std::size_t abstentions = 0;      // gold instances of this class left unlabeled
  std::size_t total = 0;            // gold instances of this class

  bool operator==(const ClassCounts&) const = default;
};

/// Confusion counts with abstention accounting: an abstention is a false
/// negative for its gold class and never a false positive.
struct ConfusionSummary {
  ClassCounts positive;
  ClassCounts negative;

  const ClassCounts& of(Polarity p) const { return p == Polarity::Positive ? positive : negative; }
  std::size_t abstentions() const { return positive.abstentions + negative.abstentions; }
  std::size_t size() const { return positive.total + negative.total; }
  bool operator==(const ConfusionSummary&) const = default;
};

ConfusionSummary summarize(std::span<const Polarity> gold,
                           std::span<const std::optional<Polarity>> predicted);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool predicted_nothing = false;  // precision was 0/0
  bool no_gold = false;            // recall was 0/0

  bool operator==(const ClassMetrics&) const = default;
};

struct Deltas {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  bool operator==(const Deltas&) const = default;
};

inline constexpr std::string_view kTrivialTag = "trivial";

struct EvalReport {
  std::string condition;  // a condition tag or "trivial"
  ClassMetrics positive;
  ClassMetrics negative;
  Deltas deltas;
  std::size_t test_size = 0;
  std::size_t abstentions = 0;
  bool balanced = false;

  bool operator==(const EvalReport&) const = default;
};

ClassMetrics class_metrics(const ClassCounts& c);
EvalReport make_report(std::string condition, const ConfusionSummary& summary, bool balanced);

/// Classifies every instance of `split` with `model`. Throws EmptyCorpus for
/// an empty split.
EvalReport evaluate(const rules::RuleModel& model, const corpus::Corpus& corpus,
                    corpus::Split split = corpus::Split::Test);

/// The constant-Positive predictor.
EvalReport trivial_baseline(const corpus::Corpus& corpus, corpus::Split split = corpus::Split::Test);

// ---------------------------------------------------------------------------
// Report table
// ---------------------------------------------------------------------------

/// Row label as printed in the table ("Bag of Words", "Trivial (Always Pos)").
std::string display_name(std::string_view condition);

/// Trivial row first, then conditions in canonical order.
std::vector<EvalReport> ordered(std::vector<EvalReport> reports);

/// Fixed-width text table: P/R/F for each class, then the three deltas.
std::string render_table(std::vector<EvalReport> reports);

nlohmann::json to_json(const EvalReport& r);
EvalReport report_from_json(const nlohmann::json& j);
nlohmann::json reports_to_json(const std::vector<EvalReport>& reports);
std::vector<EvalReport> reports_from_json(const nlohmann::json& doc);

}  // namespace elicit::eval
