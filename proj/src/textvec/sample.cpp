#include <limits>

#include "elicit/rng.hpp"
#include "elicit/textvec.hpp"

namespace elicit::textvec {

std::vector<std::string> representative_sample(const corpus::Corpus& corpus, std::size_t m,
                                                std::uint64_t seed,
                                                const SampleOptions& options) {
  const auto members = corpus.in_split(corpus::Split::Train);
  if (m < 1 || m > members.size()) {
    throw Error(ErrorCode::InvalidM, "m=" + std::to_string(m) + " outside [1, " +
                                         std::to_string(members.size()) + "] (train split size)");
  }
  const TfidfModel model = tfidf_fit(corpus, corpus::Split::Train);
  std::vector<TfidfVector> vectors;
  vectors.reserve(members.size());
  for (const auto* inst : members) vectors.push_back(model.transform(inst->text));

  // Restart seeds are drawn from one stream so the whole run depends on `seed` alone.
  Rng seeds(seed);
  Clustering best;
  for (std::size_t r = 0; r < std::max<std::size_t>(options.restarts, 1); ++r) {
    Clustering c = kmeans(vectors, m, seeds.next(), options.kmeans);
    if (r == 0 || c.objective() < best.objective()) best = std::move(c);
  }

  std::vector<std::size_t> chosen(m, members.size());
  std::vector<double> chosen_d(m, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < members.size(); ++i) {
    const std::size_t c = best.assignment[i];
    const double d = squared_distance(vectors[i], best.centroids[c]);
    const bool closer = d < chosen_d[c];
    const bool tie_lower_id = d == chosen_d[c] && members[i]->id < members[chosen[c]]->id;
    if (closer || tie_lower_id) {
      chosen[c] = i;
      chosen_d[c] = d;
    }
  }

  std::vector<std::string> ids;
  ids.reserve(m);
  for (std::size_t c = 0; c < m; ++c) ids.push_back(members[chosen[c]]->id);
  return ids;
}

}  // namespace elicit::textvec
