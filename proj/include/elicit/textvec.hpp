#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "elicit/corpus.hpp"

namespace elicit::textvec {

// ---------------------------------------------------------------------------
// Tokenization
// ---------------------------------------------------------------------------

/// A lowercased word and the byte range [start, end) it came from.
struct Token {
  std::string text;
  std::size_t start = 0;
  std::size_t end = 0;

  bool operator==(const Token&) const = default;
};

using TokenStream = std::vector<Token>;

/// Tokens are maximal runs of Unicode letters, digits and combining marks.
/// An apostrophe (U+0027 or U+2019) is kept when it sits between two word
/// characters and is normalized to U+0027. Everything else separates tokens.
/// Invalid UTF-8 bytes are separators.
TokenStream tokenize(std::string_view text);

/// Lowercased token strings only.
std::vector<std::string> token_strings(std::string_view text);

// ---------------------------------------------------------------------------
// tf-idf
// ---------------------------------------------------------------------------

/// Sparse vector: (column, weight) pairs sorted by column.
struct SparseVector {
  std::vector<std::pair<std::size_t, double>> entries;

  bool empty() const { return entries.empty(); }
  double squared_norm() const;
  double norm() const;
  double weight(std::size_t column) const;
};

using TfidfVector = SparseVector;

class TfidfModel {
 public:
  /// Columns are assigned in lexicographic token order.
  static TfidfModel fit(std::span<const std::string> documents);

  std::size_t corpus_size() const { return corpus_size_; }
  std::size_t vocabulary_size() const { return df_.size(); }
  const std::map<std::string, std::size_t>& vocabulary() const { return vocabulary_; }

  /// 0 for out-of-vocabulary tokens.
  std::size_t document_frequency(std::string_view token) const;
  std::size_t document_frequency(std::size_t column) const { return df_.at(column); }

  /// ln((1 + N) / (1 + df)) + 1
  double idf(std::size_t column) const;

  /// Raw term counts times idf, L2-normalized. Unknown tokens are ignored;
  /// a document with no known tokens maps to the zero vector.
  TfidfVector transform(std::string_view text) const;

 private:
  std::map<std::string, std::size_t> vocabulary_;
  std::vector<std::size_t> df_;
  std::size_t corpus_size_ = 0;
};

/// Fits on the given split. Throws EmptyCorpus when the split has no instances.
TfidfModel tfidf_fit(const corpus::Corpus& corpus, corpus::Split split);
TfidfVector tfidf_transform(const TfidfModel& model, std::string_view text);

// ---------------------------------------------------------------------------
// k-means
// ---------------------------------------------------------------------------

struct KMeansOptions {
  std::size_t max_iter = 100;
  double tol = 1e-6;
};

struct Clustering {
  std::size_t k = 0;
  std::vector<std::vector<double>> centroids;  // k dense rows
  std::vector<std::size_t> assignment;         // one cluster index per input vector
  std::size_t iterations = 0;
  bool converged = false;
  /// Sum of squared distances to assigned centroids: after the initial
  /// assignment, then after every Lloyd iteration.
  std::vector<double> objective_history;

  double objective() const { return objective_history.empty() ? 0.0 : objective_history.back(); }
};

/// k-means++ seeding followed by Lloyd iterations under euclidean distance.
/// Stops when the largest centroid shift drops below tol or after max_iter
/// iterations. Clusters that go empty are re-seeded with the point farthest
/// from its own centroid. Throws InvalidK unless 1 <= k <= vectors.size().
Clustering kmeans(std::span<const SparseVector> vectors, std::size_t k, std::uint64_t seed,
                  const KMeansOptions& options = {});

/// Squared euclidean distance between a sparse point and a dense centroid.
double squared_distance(const SparseVector& point, std::span<const double> centroid);

// ---------------------------------------------------------------------------
// Representative sampling
// ---------------------------------------------------------------------------

struct SampleOptions {
  KMeansOptions kmeans;
  /// Independent k-means++ restarts; the lowest final objective wins.
  std::size_t restarts = 10;
};

/// Fits tf-idf on the Train split, clusters it with k = m and returns, per
/// cluster, the id of the member closest to the centroid (ties go to the
/// lowest id). Ordered by cluster index. Throws InvalidM when m is 0 or
/// larger than the Train split.
std::vector<std::string> representative_sample(const corpus::Corpus& corpus, std::size_t m,
                                                std::uint64_t seed,
                                                const SampleOptions& options = {});

}  // namespace elicit::textvec
