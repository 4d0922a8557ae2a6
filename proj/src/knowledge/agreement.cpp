#include <map>

#include "elicit/knowledge.hpp"

namespace elicit::knowledge {

// Both P-bar and Pe reduce to integer sums over the count table, so they are
// accumulated exactly and the result does not depend on item or category order.
double fleiss_kappa(const RatingMatrix& m) {
  const auto& rows = m.ratings;
  if (rows.empty()) throw Error(ErrorCode::InvalidArgument, "rating matrix has no items");
  const std::size_t raters = rows.front().size();
  if (raters < 2) throw Error(ErrorCode::InvalidArgument, "need at least two raters");

  std::map<std::string, std::uint64_t> category_totals;
  std::uint64_t agreeing_pairs = 0;  // sum over items and categories of c(c-1)
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != raters) {
      throw Error(ErrorCode::InvalidArgument,
                  "rating matrix is not rectangular at item " + std::to_string(i));
    }
    std::map<std::string, std::uint64_t> counts;
    for (const auto& cell : rows[i]) {
      if (cell.empty()) {
        throw Error(ErrorCode::InvalidArgument, "empty rating at item " + std::to_string(i));
      }
      ++counts[cell];
    }
    for (const auto& [cat, c] : counts) {
      agreeing_pairs += c * (c - 1);
      category_totals[cat] += c;
    }
  }
  if (category_totals.size() == 1) return 1.0;

  std::uint64_t total_sq = 0;
  for (const auto& [cat, t] : category_totals) total_sq += t * t;

  const auto items = static_cast<double>(rows.size());
  const auto n = static_cast<double>(raters);
  const double p_bar = static_cast<double>(agreeing_pairs) / (items * n * (n - 1.0));
  const double p_e = static_cast<double>(total_sq) / ((items * n) * (items * n));
  return (p_bar - p_e) / (1.0 - p_e);
}

}  // namespace elicit::knowledge
