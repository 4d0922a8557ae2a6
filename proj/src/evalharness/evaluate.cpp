#include <cmath>

#include "elicit/evalharness.hpp"

namespace elicit::eval {

ConfusionSummary summarize(std::span<const Polarity> gold,
                           std::span<const std::optional<Polarity>> predicted) {
  if (gold.size() != predicted.size()) {
    throw Error(ErrorCode::InvalidArgument, "gold and predicted label counts differ");
  }
  ConfusionSummary s;
  auto counts = [&](Polarity p) -> ClassCounts& {
    return p == Polarity::Positive ? s.positive : s.negative;
  };
  for (std::size_t i = 0; i < gold.size(); ++i) {
    ClassCounts& g = counts(gold[i]);
    ++g.total;
    if (!predicted[i]) {
      ++g.abstentions;
      ++g.false_negatives;
    } else if (*predicted[i] == gold[i]) {
      ++g.true_positives;
    } else {
      ++g.false_negatives;
      ++counts(*predicted[i]).false_positives;
    }
  }
  return s;
}

ClassMetrics class_metrics(const ClassCounts& c) {
  ClassMetrics m;
  const std::size_t predicted = c.true_positives + c.false_positives;
  if (predicted == 0) {
    m.predicted_nothing = true;
  } else {
    m.precision = static_cast<double>(c.true_positives) / static_cast<double>(predicted);
  }
  if (c.total == 0) {
    m.no_gold = true;
  } else {
    m.recall = static_cast<double>(c.true_positives) / static_cast<double>(c.total);
  }
  const double sum = m.precision + m.recall;
  m.f1 = sum > 0.0 ? 2.0 * m.precision * m.recall / sum : 0.0;
  return m;
}

EvalReport make_report(std::string condition, const ConfusionSummary& summary, bool balanced) {
  EvalReport r;
  r.condition = std::move(condition);
  r.positive = class_metrics(summary.positive);
  r.negative = class_metrics(summary.negative);
  r.deltas = Deltas{std::fabs(r.positive.precision - r.negative.precision),
                    std::fabs(r.positive.recall - r.negative.recall),
                    std::fabs(r.positive.f1 - r.negative.f1)};
  r.test_size = summary.size();
  r.abstentions = summary.abstentions();
  r.balanced = balanced;
  return r;
}

namespace {

template <typename Predict>
EvalReport run(std::string condition, const corpus::Corpus& corpus, corpus::Split split,
               Predict&& predict) {
  const auto members = corpus.in_split(split);
  if (members.empty()) {
    throw Error(ErrorCode::EmptyCorpus,
                "split '" + std::string(corpus::to_string(split)) + "' has no instances");
  }
  std::vector<Polarity> gold;
  std::vector<std::optional<Polarity>> predicted;
  gold.reserve(members.size());
  predicted.reserve(members.size());
  for (const auto* inst : members) {
    gold.push_back(inst->label);
    predicted.push_back(predict(*inst));
  }
  const auto counts = corpus.counts(split);
  return make_report(std::move(condition), summarize(gold, predicted),
                     counts.positive == counts.negative);
}

}  // namespace

EvalReport evaluate(const rules::RuleModel& model, const corpus::Corpus& corpus, corpus::Split split) {
  return run(std::string(to_string(model.condition)), corpus, split,
             [&](const corpus::Instance& inst) { return rules::classify(model, inst.text).label; });
}

EvalReport trivial_baseline(const corpus::Corpus& corpus, corpus::Split split) {
  return run(std::string(kTrivialTag), corpus, split,
             [](const corpus::Instance&) { return std::optional<Polarity>(Polarity::Positive); });
}

}  // namespace elicit::eval
