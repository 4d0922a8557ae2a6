#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "elicit/rng.hpp"
#include "elicit/textvec.hpp"

using namespace elicit;
using namespace elicit::textvec;

namespace {

corpus::Corpus train_corpus(const std::vector<std::string>& texts) {
  corpus::Corpus c;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    c.instances.push_back({corpus::make_instance_id(i), texts[i],
                           i % 2 ? Polarity::Negative : Polarity::Positive, i % 2 ? 1 : 5,
                           corpus::Split::Train});
  }
  return c;
}

SparseVector dense_to_sparse(const std::vector<double>& v) {
  SparseVector s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] != 0.0) s.entries.emplace_back(i, v[i]);
  }
  return s;
}

double objective_of(std::span<const SparseVector> pts, const std::vector<std::size_t>& assign,
                    std::size_t k, std::size_t dim) {
  std::vector<std::vector<double>> mean(k, std::vector<double>(dim, 0.0));
  std::vector<std::size_t> count(k, 0);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    ++count[assign[i]];
    for (auto [c, w] : pts[i].entries) mean[assign[i]][c] += w;
  }
  for (std::size_t j = 0; j < k; ++j) {
    for (double& x : mean[j]) x /= static_cast<double>(count[j]);
  }
  double total = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) total += squared_distance(pts[i], mean[assign[i]]);
  return total;
}

}  // namespace

TEST_CASE("tokenize examples") {
  CHECK(token_strings("The food was over-hyped!!") ==
        std::vector<std::string>{"the", "food", "was", "over", "hyped"});
  CHECK(token_strings("Don't go") == std::vector<std::string>{"don't", "go"});
  CHECK(token_strings("Don\xE2\x80\x99t go") == std::vector<std::string>{"don't", "go"});
  CHECK(token_strings("'quoted' words'") == std::vector<std::string>{"quoted", "words"});
  CHECK(token_strings("CAFÉ Crème 42") == std::vector<std::string>{"café", "crème", "42"});
  CHECK(token_strings("").empty());
  CHECK(token_strings(" ...!? ").empty());
}

TEST_CASE("token offsets point back into the source text") {
  const std::string text = "Über-tasty   pizza, wasn't it? ñam";
  for (const Token& t : tokenize(text)) {
    REQUIRE(t.end <= text.size());
    REQUIRE(t.start < t.end);
    const std::string slice = text.substr(t.start, t.end - t.start);
    CHECK(token_strings(slice) == std::vector<std::string>{t.text});
  }
}

TEST_CASE("tf-idf document frequencies") {
  const std::vector<std::string> docs{"a b", "b c"};
  const TfidfModel m = TfidfModel::fit(docs);
  CHECK(m.corpus_size() == 2);
  CHECK(m.document_frequency("a") == 1);
  CHECK(m.document_frequency("b") == 2);
  CHECK(m.document_frequency("c") == 1);
  CHECK(m.document_frequency("zzz") == 0);
  // Columns are lexicographic.
  CHECK(m.vocabulary().at("a") == 0);
  CHECK(m.vocabulary().at("b") == 1);
  CHECK(m.vocabulary().at("c") == 2);
}

TEST_CASE("tf-idf weights match frozen values") {
  const std::vector<std::string> docs{"a b", "b c"};
  const TfidfModel m = TfidfModel::fit(docs);
  const TfidfVector v = m.transform("b c");
  CHECK(v.weight(0) == 0.0);
  CHECK(std::abs(v.weight(1) - 0.5797386715376657) < 1e-9);
  CHECK(std::abs(v.weight(2) - 0.8148024746671689) < 1e-9);
}

TEST_CASE("tf-idf agrees with a brute-force computation") {
  const std::vector<std::string> docs{
      "the pasta was great great", "great service", "the soup was cold",
      "cold pasta and cold soup", "service was slow"};
  const TfidfModel m = TfidfModel::fit(docs);

  std::vector<std::vector<std::string>> toks;
  std::set<std::string> vocab;
  for (const auto& d : docs) {
    toks.push_back(token_strings(d));
    vocab.insert(toks.back().begin(), toks.back().end());
  }
  const double n = static_cast<double>(docs.size());
  for (std::size_t d = 0; d < docs.size(); ++d) {
    std::map<std::string, double> w;
    for (const auto& term : vocab) {
      double tf = static_cast<double>(std::count(toks[d].begin(), toks[d].end(), term));
      if (tf == 0) continue;
      double df = 0;
      for (const auto& t : toks) df += std::find(t.begin(), t.end(), term) != t.end();
      w[term] = tf * (std::log((1 + n) / (1 + df)) + 1);
    }
    double norm = 0;
    for (auto& [_, x] : w) norm += x * x;
    norm = std::sqrt(norm);
    const TfidfVector v = m.transform(docs[d]);
    for (const auto& term : vocab) {
      const double expect = w.count(term) ? w[term] / norm : 0.0;
      CHECK(std::abs(v.weight(m.vocabulary().at(term)) - expect) < 1e-9);
    }
  }
}

TEST_CASE("tf-idf vectors are unit length or zero") {
  Rng rng(3);
  const std::vector<std::string> words{"alpha", "beta", "gamma", "delta", "eps", "zeta"};
  std::vector<std::string> docs;
  for (int i = 0; i < 60; ++i) {
    std::string d;
    const auto len = rng.below(6);
    for (std::uint64_t j = 0; j < len; ++j) d += words[rng.below(words.size())] + " ";
    docs.push_back(d);
  }
  const TfidfModel m = TfidfModel::fit(docs);
  for (const auto& d : docs) {
    const double norm = m.transform(d).norm();
    CHECK((norm == 0.0 || std::abs(norm - 1.0) < 1e-9));
  }
  CHECK(m.transform("nothing known here").empty());
}

TEST_CASE("tf-idf fit on an empty split fails") {
  const corpus::Corpus c = train_corpus({"x y"});
  CHECK_THROWS_AS(tfidf_fit(c, corpus::Split::Test), Error);
  CHECK(tfidf_fit(c, corpus::Split::Train).corpus_size() == 1);
}

TEST_CASE("k-means with k = n gives zero objective") {
  std::vector<SparseVector> pts{dense_to_sparse({1, 0}), dense_to_sparse({0, 1}),
                                dense_to_sparse({0.6, 0.8})};
  const Clustering c = kmeans(pts, 3, 7);
  CHECK(c.objective() < 1e-24);
  CHECK(std::set<std::size_t>(c.assignment.begin(), c.assignment.end()).size() == 3);
}

TEST_CASE("k-means with k = 1 puts the centroid at the mean") {
  std::vector<SparseVector> pts{dense_to_sparse({1, 0, 0}), dense_to_sparse({0, 1, 0}),
                                dense_to_sparse({0, 0, 1}), dense_to_sparse({1, 1, 0})};
  const Clustering c = kmeans(pts, 1, 1);
  REQUIRE(c.centroids.size() == 1);
  CHECK(c.centroids[0][0] == doctest::Approx(0.5));
  CHECK(c.centroids[0][1] == doctest::Approx(0.5));
  CHECK(c.centroids[0][2] == doctest::Approx(0.25));
}

TEST_CASE("k-means finds the optimal two-partition of well separated points") {
  std::vector<SparseVector> pts{
      dense_to_sparse({1.0, 0.0}),  dense_to_sparse({0.9, 0.1}), dense_to_sparse({0.95, 0.05}),
      dense_to_sparse({0.0, 1.0}),  dense_to_sparse({0.1, 0.9}), dense_to_sparse({0.05, 0.95})};
  double best = std::numeric_limits<double>::infinity();
  for (unsigned mask = 1; mask + 1 < (1u << pts.size()); ++mask) {
    std::vector<std::size_t> a(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) a[i] = (mask >> i) & 1u;
    best = std::min(best, objective_of(pts, a, 2, 2));
  }
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Clustering c = kmeans(pts, 2, seed);
    CHECK(c.objective() == doctest::Approx(best).epsilon(1e-12));
    CHECK(c.converged);
  }
}

TEST_CASE("k-means objective never increases") {
  Rng rng(99);
  for (int fixture = 0; fixture < 30; ++fixture) {
    std::vector<SparseVector> pts;
    const std::size_t n = 10 + rng.below(30);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> v(8);
      for (double& x : v) x = rng.below(3) == 0 ? rng.unit() : 0.0;
      pts.push_back(dense_to_sparse(v));
    }
    const std::size_t k = 1 + rng.below(n);
    const Clustering c = kmeans(pts, k, rng.next());
    for (std::size_t i = 1; i < c.objective_history.size(); ++i) {
      CHECK(c.objective_history[i] <= c.objective_history[i - 1] * (1 + 1e-12) + 1e-15);
    }
  }
}

TEST_CASE("k-means rejects invalid k") {
  std::vector<SparseVector> pts{dense_to_sparse({1.0})};
  for (std::size_t k : {std::size_t{0}, std::size_t{2}}) {
    try {
      kmeans(pts, k, 0);
      FAIL("expected invalid k");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InvalidK);
    }
  }
}

TEST_CASE("representative sample with m equal to the split size returns every id") {
  const corpus::Corpus c = train_corpus({"red apple", "green pear", "blue plum", "red pear"});
  auto ids = representative_sample(c, 4, 2);
  std::sort(ids.begin(), ids.end());
  CHECK(ids == std::vector<std::string>{"inst-000000", "inst-000001", "inst-000002",
                                        "inst-000003"});
}

TEST_CASE("representative sample is deterministic and distinct") {
  std::vector<std::string> texts;
  Rng rng(12);
  const std::vector<std::string> words{"pizza", "crust", "waiter", "rude", "tasty", "cold",
                                       "sushi", "fresh", "price", "cheap", "music", "loud"};
  for (int i = 0; i < 120; ++i) {
    std::string t;
    for (int j = 0; j < 5; ++j) t += words[rng.below(words.size())] + " ";
    texts.push_back(t);
  }
  const corpus::Corpus c = train_corpus(texts);
  const auto a = representative_sample(c, 12, 77);
  const auto b = representative_sample(c, 12, 77);
  CHECK(a == b);
  CHECK(std::set<std::string>(a.begin(), a.end()).size() == 12);
}

TEST_CASE("representative sample picks the member nearest each planted group's mean") {
  // Three groups of three with disjoint vocabularies: the optimal clustering
  // is the planted one, so the expected picks can be computed directly.
  const std::vector<std::string> texts{
      "pizza pizza crust", "pizza crust", "pizza crust crust",
      "waiter rude slow",  "waiter rude", "waiter slow slow",
      "sushi fresh fish",  "sushi fish",  "sushi sushi fresh"};
  const corpus::Corpus c = train_corpus(texts);
  const TfidfModel m = TfidfModel::fit(texts);
  std::vector<SparseVector> vecs;
  for (const auto& t : texts) vecs.push_back(m.transform(t));

  std::set<std::string> expected;
  for (std::size_t g = 0; g < 3; ++g) {
    std::vector<double> mean(m.vocabulary_size(), 0.0);
    for (std::size_t i = 3 * g; i < 3 * g + 3; ++i) {
      for (auto [col, w] : vecs[i].entries) mean[col] += w / 3.0;
    }
    std::size_t best = 3 * g;
    for (std::size_t i = 3 * g + 1; i < 3 * g + 3; ++i) {
      if (squared_distance(vecs[i], mean) < squared_distance(vecs[best], mean)) best = i;
    }
    expected.insert(corpus::make_instance_id(best));
  }
  const auto ids = representative_sample(c, 3, 5);
  CHECK(std::set<std::string>(ids.begin(), ids.end()) == expected);
}

TEST_CASE("representative sample rejects invalid m") {
  const corpus::Corpus c = train_corpus({"a", "b"});
  for (std::size_t m : {std::size_t{0}, std::size_t{3}}) {
    try {
      representative_sample(c, m, 0);
      FAIL("expected invalid m");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InvalidM);
    }
  }
}
