#include <algorithm>
#include <cmath>
#include <limits>

#include "elicit/rng.hpp"
#include "elicit/textvec.hpp"

namespace elicit::textvec {

double squared_distance(const SparseVector& point, std::span<const double> centroid) {
  // ||x||^2 - 2 x.c + ||c||^2, evaluated as a sum of non-negative terms so
  // the result never goes below zero through cancellation.
  double total = 0.0;
  std::size_t next = 0;
  for (const auto& [col, w] : point.entries) {
    for (; next < col; ++next) total += centroid[next] * centroid[next];
    const double d = w - centroid[col];
    total += d * d;
    next = col + 1;
  }
  for (; next < centroid.size(); ++next) total += centroid[next] * centroid[next];
  return total;
}

namespace {

using Dense = std::vector<double>;

Dense densify(const SparseVector& v, std::size_t dim) {
  Dense d(dim, 0.0);
  for (const auto& [col, w] : v.entries) d[col] = w;
  return d;
}

class Lloyd {
 public:
  // ||c||^2 + sum over the point's nonzeros of (w - c)^2 - c^2. O(nnz).
  double dist(std::size_t i, std::size_t c) const {
    const Dense& centroid = centroids_[c];
    double total = centroid_sq_[c];
    for (const auto& [col, w] : points_[i].entries) {
      const double d = w - centroid[col];
      total += d * d - centroid[col] * centroid[col];
    }
    return std::max(total, 0.0);
  }

  void refresh_norm(std::size_t c) {
    double s = 0.0;
    for (double x : centroids_[c]) s += x * x;
    centroid_sq_[c] = s;
  }

  Lloyd(std::span<const SparseVector> points, std::size_t k, std::size_t dim)
      : points_(points), k_(k), dim_(dim), centroid_sq_(k, 0.0) {}

  void seed_plus_plus(Rng& rng) {
    const std::size_t n = points_.size();
    centroids_.clear();
    std::vector<bool> chosen(n, false);

    std::size_t first = static_cast<std::size_t>(rng.below(n));
    chosen[first] = true;
    centroids_.push_back(densify(points_[first], dim_));
    refresh_norm(0);

    std::vector<double> nearest(n);
    for (std::size_t i = 0; i < n; ++i) nearest[i] = dist(i, 0);

    while (centroids_.size() < k_) {
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (!chosen[i]) total += nearest[i];
      }
      std::size_t pick = n;
      if (total > 0.0) {
        double target = rng.unit() * total;
        for (std::size_t i = 0; i < n; ++i) {
          if (chosen[i] || nearest[i] <= 0.0) continue;
          pick = i;
          target -= nearest[i];
          if (target < 0.0) break;
        }
      }
      if (pick == n) {
        // Every remaining point coincides with a centroid.
        pick = static_cast<std::size_t>(std::find(chosen.begin(), chosen.end(), false) - chosen.begin());
      }
      chosen[pick] = true;
      centroids_.push_back(densify(points_[pick], dim_));
      const std::size_t c = centroids_.size() - 1;
      refresh_norm(c);
      for (std::size_t i = 0; i < n; ++i) nearest[i] = std::min(nearest[i], dist(i, c));
    }
    assignment_.assign(n, k_);
  }

  // Moves each point to its nearest centroid. A point only leaves its current
  // cluster for a strictly closer one; ties otherwise go to the lowest index.
  void assign() {
    for (std::size_t i = 0; i < points_.size(); ++i) {
      std::size_t best = assignment_[i];
      double best_d = best < k_ ? dist(i, best) : std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k_; ++c) {
        const double d = dist(i, c);
        if (d < best_d) {
          best = c;
          best_d = d;
        }
      }
      assignment_[i] = best;
    }
    reseed_empty();
  }

  // Each empty cluster takes the point farthest from its own centroid, drawn
  // from clusters that can spare one.
  void reseed_empty() {
    std::vector<std::size_t> sizes(k_, 0);
    for (std::size_t a : assignment_) ++sizes[a];
    for (std::size_t c = 0; c < k_; ++c) {
      if (sizes[c] > 0) continue;
      std::size_t far = points_.size();
      double far_d = -1.0;
      for (std::size_t i = 0; i < points_.size(); ++i) {
        if (sizes[assignment_[i]] < 2) continue;
        const double d = dist(i, assignment_[i]);
        if (d > far_d) {
          far = i;
          far_d = d;
        }
      }
      if (far == points_.size()) continue;  // unreachable while k <= n
      --sizes[assignment_[far]];
      assignment_[far] = c;
      sizes[c] = 1;
      centroids_[c] = densify(points_[far], dim_);
      refresh_norm(c);
    }
  }

  // Recomputes centroids as member means; returns the largest shift.
  double update() {
    std::vector<Dense> sums(k_, Dense(dim_, 0.0));
    std::vector<std::size_t> sizes(k_, 0);
    for (std::size_t i = 0; i < points_.size(); ++i) {
      const std::size_t c = assignment_[i];
      ++sizes[c];
      for (const auto& [col, w] : points_[i].entries) sums[c][col] += w;
    }
    double shift = 0.0;
    for (std::size_t c = 0; c < k_; ++c) {
      if (sizes[c] == 0) continue;
      double moved = 0.0;
      for (std::size_t j = 0; j < dim_; ++j) {
        const double mean = sums[c][j] / static_cast<double>(sizes[c]);
        const double d = mean - centroids_[c][j];
        moved += d * d;
        centroids_[c][j] = mean;
      }
      shift = std::max(shift, std::sqrt(moved));
      refresh_norm(c);
    }
    return shift;
  }

  double objective() const {
    double total = 0.0;
    for (std::size_t i = 0; i < points_.size(); ++i) {
      total += dist(i, assignment_[i]);
    }
    return total;
  }

  std::vector<Dense>& centroids() { return centroids_; }
  std::vector<std::size_t>& assignment() { return assignment_; }

 private:
  std::span<const SparseVector> points_;
  std::size_t k_;
  std::size_t dim_;
  std::vector<Dense> centroids_;
  std::vector<double> centroid_sq_;
  std::vector<std::size_t> assignment_;
};

}  // namespace

Clustering kmeans(std::span<const SparseVector> vectors, std::size_t k, std::uint64_t seed,
                  const KMeansOptions& options) {
  if (k < 1 || k > vectors.size()) {
    throw Error(ErrorCode::InvalidK, "k=" + std::to_string(k) + " outside [1, " +
                                         std::to_string(vectors.size()) + "]");
  }
  if (options.max_iter < 1) throw Error(ErrorCode::InvalidArgument, "max_iter must be >= 1");

  std::size_t dim = 0;
  for (const auto& v : vectors) {
    if (!v.entries.empty()) dim = std::max(dim, v.entries.back().first + 1);
  }

  Rng rng(seed);
  Lloyd lloyd(vectors, k, dim);
  lloyd.seed_plus_plus(rng);
  lloyd.assign();

  Clustering result;
  result.k = k;
  result.objective_history.push_back(lloyd.objective());
  for (std::size_t it = 0; it < options.max_iter; ++it) {
    const double shift = lloyd.update();
    lloyd.assign();
    result.objective_history.push_back(lloyd.objective());
    result.iterations = it + 1;
    if (shift < options.tol) {
      result.converged = true;
      break;
    }
  }
  result.centroids = std::move(lloyd.centroids());
  result.assignment = std::move(lloyd.assignment());
  return result;
}

}  // namespace elicit::textvec
