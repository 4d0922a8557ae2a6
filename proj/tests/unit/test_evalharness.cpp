#include <doctest.h>

#include <cmath>
#include <sstream>

#include "elicit/evalharness.hpp"
#include "elicit/rng.hpp"

using namespace elicit;
using namespace elicit::eval;

namespace {

const auto P = Polarity::Positive;
const auto N = Polarity::Negative;

corpus::Corpus balanced_test(std::size_t per_class) {
  corpus::Corpus c;
  for (std::size_t i = 0; i < 2 * per_class; ++i) {
    const bool pos = i < per_class;
    c.instances.push_back({corpus::make_instance_id(i), pos ? "good" : "bad", pos ? P : N,
                           pos ? 5 : 1, corpus::Split::Test});
  }
  c.balanced = true;
  return c;
}

}  // namespace

TEST_CASE("trivial baseline on a balanced split") {
  const EvalReport r = trivial_baseline(balanced_test(1000));
  CHECK(r.condition == "trivial");
  CHECK(r.positive.precision == 0.5);
  CHECK(r.positive.recall == 1.0);
  CHECK(std::abs(r.positive.f1 - 0.667) <= 0.0005);
  CHECK(r.negative.precision == 0.0);
  CHECK(r.negative.recall == 0.0);
  CHECK(r.negative.f1 == 0.0);
  CHECK(r.negative.predicted_nothing);
  CHECK(r.deltas.precision == 0.5);
  CHECK(r.deltas.recall == 1.0);
  CHECK(std::abs(r.deltas.f1 - 0.667) <= 0.0005);
  CHECK(r.test_size == 2000);
  CHECK(r.balanced);
}

TEST_CASE("perfect predictor") {
  const std::vector<Polarity> gold{P, N, P, N, N};
  const std::vector<std::optional<Polarity>> pred{P, N, P, N, N};
  const EvalReport r = make_report("bow", summarize(gold, pred), false);
  for (const auto* m : {&r.positive, &r.negative}) {
    CHECK(m->precision == 1.0);
    CHECK(m->recall == 1.0);
    CHECK(m->f1 == 1.0);
  }
  CHECK(r.deltas == Deltas{});
}

TEST_CASE("ten predictions with two abstentions") {
  const std::vector<Polarity> gold{P, P, P, P, P, N, N, N, N, N};
  const std::vector<std::optional<Polarity>> pred{P, P, P, N, std::nullopt,
                                                  N, N, P, P, std::nullopt};
  const ConfusionSummary s = summarize(gold, pred);
  CHECK(s.positive == ClassCounts{3, 2, 2, 1, 5});
  CHECK(s.negative == ClassCounts{2, 1, 3, 1, 5});
  CHECK(s.abstentions() == 2);

  // Hand arithmetic: Pos P=3/5 R=3/5 F=3/5; Neg P=2/3 R=2/5 F=1/2.
  const EvalReport r = make_report("perturbation", s, true);
  CHECK(r.positive.precision == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(r.positive.recall == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(r.positive.f1 == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(r.negative.precision == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(r.negative.recall == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(r.negative.f1 == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r.deltas.precision == doctest::Approx(1.0 / 15.0).epsilon(1e-12));
  CHECK(r.deltas.recall == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(r.deltas.f1 == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(r.abstentions == 2);
  CHECK(r.test_size == 10);
}

TEST_CASE("confusion counts agree with brute-force counting") {
  Rng rng(1234);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = rng.below(20);
    std::vector<Polarity> gold;
    std::vector<std::optional<Polarity>> pred;
    for (std::size_t i = 0; i < n; ++i) {
      gold.push_back(rng.below(2) ? P : N);
      const auto r = rng.below(3);
      pred.push_back(r == 0 ? std::optional<Polarity>{} : (r == 1 ? P : N));
    }
    const ConfusionSummary s = summarize(gold, pred);
    for (Polarity c : {P, N}) {
      std::size_t tp = 0, fp = 0, fn = 0, ab = 0, tot = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (gold[i] == c) {
          ++tot;
          if (pred[i] == c) ++tp;
          else ++fn;
          if (!pred[i]) ++ab;
        } else if (pred[i] == c) {
          ++fp;
        }
      }
      CHECK(s.of(c) == ClassCounts{tp, fp, fn, ab, tot});
      const ClassMetrics m = class_metrics(s.of(c));
      const double p = tp + fp ? double(tp) / double(tp + fp) : 0.0;
      const double rec = tot ? double(tp) / double(tot) : 0.0;
      CHECK(m.precision == p);
      CHECK(m.recall == rec);
      CHECK(m.f1 == (p + rec > 0 ? 2 * p * rec / (p + rec) : 0.0));
      CHECK(m.predicted_nothing == (tp + fp == 0));
      CHECK(m.no_gold == (tot == 0));
    }
  }
}

TEST_CASE("all-negative split") {
  corpus::Corpus c;
  c.instances.push_back({"x", "bad", N, 1, corpus::Split::Test});
  const EvalReport r = trivial_baseline(c);
  CHECK(r.positive.precision == 0.0);
  CHECK(r.positive.no_gold);
  CHECK(r.negative.predicted_nothing);
  CHECK(r.negative.recall == 0.0);
}

TEST_CASE("evaluate classifies the requested split") {
  rules::RuleModel m;
  m.condition = Condition::Bow;
  m.keywords["good"] = {P, {}};
  const corpus::Corpus c = balanced_test(3);
  const EvalReport r = evaluate(m, c);
  CHECK(r.condition == "bow");
  CHECK(r.positive.precision == 1.0);
  CHECK(r.positive.recall == 1.0);
  CHECK(r.negative.recall == 0.0);
  CHECK(r.abstentions == 3);
  try {
    evaluate(m, c, corpus::Split::Train);
    FAIL("expected empty corpus");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyCorpus);
  }
}

TEST_CASE("report table") {
  std::vector<EvalReport> reports;
  reports.push_back(make_report("concept_annotation", {}, true));
  reports.push_back(trivial_baseline(balanced_test(2)));
  reports.push_back(make_report("bow", {}, true));
  const std::string table = render_table(reports);
  std::istringstream lines(table);
  std::vector<std::string> rows;
  for (std::string l; std::getline(lines, l);) rows.push_back(l);
  REQUIRE(rows.size() >= 5);
  CHECK(table.find("Trivial (Always Pos)") < table.find("Bag of Words"));
  CHECK(table.find("Bag of Words") < table.find("Concept Annotation"));
  CHECK(table.find("0.667") != std::string::npos);

  const auto ord = ordered(reports);
  CHECK(ord[0].condition == "trivial");
  CHECK(ord[1].condition == "bow");

  CHECK(display_name("concept_bow") == "Concept Bag of Words");
  CHECK(reports_from_json(reports_to_json(reports)) == ordered(reports));
}
