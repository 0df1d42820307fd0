#include <limits>

#include "riskcls/errors.hpp"
#include "riskcls/rng.hpp"
#include "riskcls/views.hpp"

namespace riskcls {

namespace {

std::size_t nearest(const Eigen::VectorXd& x, const std::vector<Eigen::VectorXd>& centroids) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    double d = (x - centroids[c]).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

// k-means++: first centre uniform, then proportional to squared distance
// to the nearest chosen centre.
std::vector<Eigen::VectorXd> plus_plus_init(std::span<const Eigen::VectorXd> points, std::size_t k, Rng& rng) {
  const std::size_t n = points.size();
  std::vector<Eigen::VectorXd> centroids;
  centroids.reserve(k);
  centroids.push_back(points[uniform_index(rng, n)]);
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = (points[i] - centroids[0]).squaredNorm();
  while (centroids.size() < k) {
    double total = 0.0;
    for (double d : d2) total += d;
    std::size_t pick = 0;
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      double r = u(rng);
      double acc = 0.0;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (r < acc && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = uniform_index(rng, n);
    }
    centroids.push_back(points[pick]);
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], (points[i] - centroids.back()).squaredNorm());
  }
  return centroids;
}

}  // namespace

double inertia(std::span<const Eigen::VectorXd> points, std::span<const Eigen::VectorXd> centroids,
               std::span<const std::size_t> assignments) {
  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) total += (points[i] - centroids[assignments[i]]).squaredNorm();
  return total;
}

KMeansResult kmeans(std::span<const Eigen::VectorXd> points, std::size_t k, std::size_t max_iters,
                    std::uint64_t seed) {
  if (points.empty()) throw ValidationError("kmeans needs at least one point");
  if (k == 0) throw ValidationError("kmeans needs k >= 1");
  const auto dim = points[0].size();
  for (const auto& p : points) {
    if (p.size() != dim) throw ValidationError("kmeans: points have mismatched dimensions");
  }

  KMeansResult result;
  const std::size_t n = points.size();
  if (n <= k) {
    result.centroids.assign(points.begin(), points.end());
    result.assignments.resize(n);
    for (std::size_t i = 0; i < n; ++i) result.assignments[i] = i;
    result.inertia_history.push_back(0.0);
    return result;
  }

  Rng rng(seed);
  result.centroids = plus_plus_init(points, k, rng);
  result.assignments.assign(n, std::numeric_limits<std::size_t>::max());

  for (std::size_t iter = 0; iter < std::max<std::size_t>(max_iters, 1); ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      auto c = nearest(points[i], result.centroids);
      if (c != result.assignments[i]) {
        result.assignments[i] = c;
        changed = true;
      }
    }
    result.inertia_history.push_back(inertia(points, result.centroids, result.assignments));
    result.iterations = iter + 1;
    if (!changed) break;

    // Update step; an emptied cluster keeps its previous centre.
    std::vector<Eigen::VectorXd> sums(k, Eigen::VectorXd::Zero(dim));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sums[result.assignments[i]] += points[i];
      ++counts[result.assignments[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) result.centroids[c] = sums[c] / static_cast<double>(counts[c]);
    }
  }
  return result;
}

}  // namespace riskcls
