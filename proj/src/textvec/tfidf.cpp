#include <algorithm>
#include <cmath>
#include <set>

#include "elicit/textvec.hpp"

namespace elicit::textvec {

double SparseVector::squared_norm() const {
  double s = 0.0;
  for (const auto& [col, w] : entries) s += w * w;
  return s;
}

double SparseVector::norm() const { return std::sqrt(squared_norm()); }

double SparseVector::weight(std::size_t column) const {
  auto it = std::lower_bound(entries.begin(), entries.end(), column,
                             [](const auto& e, std::size_t c) { return e.first < c; });
  return (it != entries.end() && it->first == column) ? it->second : 0.0;
}

TfidfModel TfidfModel::fit(std::span<const std::string> documents) {
  std::map<std::string, std::size_t> df;
  for (const auto& doc : documents) {
    std::set<std::string> seen;
    for (auto& tok : token_strings(doc)) seen.insert(std::move(tok));
    for (const auto& tok : seen) ++df[tok];
  }
  TfidfModel model;
  model.corpus_size_ = documents.size();
  model.df_.reserve(df.size());
  for (const auto& [tok, count] : df) {
    model.vocabulary_.emplace(tok, model.df_.size());
    model.df_.push_back(count);
  }
  return model;
}

std::size_t TfidfModel::document_frequency(std::string_view token) const {
  auto it = vocabulary_.find(std::string(token));
  return it == vocabulary_.end() ? 0 : df_[it->second];
}

double TfidfModel::idf(std::size_t column) const {
  const auto n = static_cast<double>(corpus_size_);
  const auto df = static_cast<double>(df_.at(column));
  return std::log((1.0 + n) / (1.0 + df)) + 1.0;
}

TfidfVector TfidfModel::transform(std::string_view text) const {
  std::map<std::size_t, std::size_t> tf;
  for (const auto& tok : token_strings(text)) {
    auto it = vocabulary_.find(tok);
    if (it != vocabulary_.end()) ++tf[it->second];
  }
  TfidfVector v;
  v.entries.reserve(tf.size());
  for (const auto& [col, count] : tf) {
    v.entries.emplace_back(col, static_cast<double>(count) * idf(col));
  }
  const double n = v.norm();
  if (n > 0.0) {
    for (auto& e : v.entries) e.second /= n;
  }
  return v;
}

TfidfModel tfidf_fit(const corpus::Corpus& corpus, corpus::Split split) {
  std::vector<std::string> docs;
  for (const auto* inst : corpus.in_split(split)) docs.push_back(inst->text);
  if (docs.empty()) {
    throw Error(ErrorCode::EmptyCorpus,
                "split '" + std::string(corpus::to_string(split)) + "' has no instances");
  }
  return TfidfModel::fit(docs);
}

TfidfVector tfidf_transform(const TfidfModel& model, std::string_view text) {
  return model.transform(text);
}

}  // namespace elicit::textvec
