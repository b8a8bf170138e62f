#include "boxmon/kmeans.hpp"

#include <limits>
#include <random>

#include "boxmon/errors.hpp"

namespace boxmon {

namespace {

std::size_t nearest(const std::vector<Vector>& centroids, const Vector& p, double* dist2 = nullptr) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = (centroids[c] - p).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  if (dist2) *dist2 = best_d;
  return best;
}

std::vector<Vector> plus_plus_seeds(const std::vector<Vector>& points, std::size_t k, std::mt19937_64& rng) {
  const std::size_t n = points.size();
  std::vector<Vector> centroids;
  centroids.reserve(k);
  std::uniform_int_distribution<std::size_t> first(0, n - 1);
  std::vector<char> chosen(n, 0);
  std::size_t idx = first(rng);
  centroids.push_back(points[idx]);
  chosen[idx] = 1;

  std::vector<double> d2(n);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  while (centroids.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      nearest(centroids, points[i], &d2[i]);
      if (chosen[i]) d2[i] = 0.0;
      total += d2[i];
    }
    if (total <= 0.0) {
      // Every remaining point duplicates a centroid: take the first unchosen.
      for (idx = 0; idx < n && chosen[idx]; ++idx) {
      }
    } else {
      const double target = u01(rng) * total;
      double run = 0.0;
      idx = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (d2[i] <= 0.0) continue;
        run += d2[i];
        idx = i;
        if (run >= target) break;
      }
    }
    centroids.push_back(points[idx]);
    chosen[idx] = 1;
  }
  return centroids;
}

}  // namespace

std::vector<std::size_t> kmeans(const std::vector<Vector>& points, std::size_t k, std::uint64_t seed,
                                const KMeansOptions& opts) {
  if (k == 0) throw ArgumentError("kmeans: k must be >= 1");
  if (k > points.size()) throw ArgumentError("kmeans: k exceeds number of points");
  const std::size_t n = points.size();
  const Eigen::Index dim = points.front().size();
  for (const auto& p : points)
    if (p.size() != dim) throw ShapeError("kmeans: points of differing dimension");

  std::mt19937_64 rng(seed);
  std::vector<Vector> centroids = plus_plus_seeds(points, k, rng);
  std::vector<std::size_t> assign(n);
  for (std::size_t i = 0; i < n; ++i) assign[i] = nearest(centroids, points[i]);

  for (std::size_t iter = 0; iter < opts.max_iterations; ++iter) {
    std::vector<Vector> sums(k, Vector::Zero(dim));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sums[assign[i]] += points[i];
      ++counts[assign[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        centroids[c] = sums[c] / static_cast<double>(counts[c]);
        continue;
      }
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = (points[i] - centroids[assign[i]]).squaredNorm();
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      centroids[c] = points[far];
      assign[far] = c;
    }

    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t a = nearest(centroids, points[i]);
      if (a != assign[i]) {
        assign[i] = a;
        changed = true;
      }
    }
    if (!changed) break;
  }
  return assign;
}

double within_cluster_sse(const std::vector<Vector>& points, const std::vector<std::size_t>& assignment,
                          std::size_t k) {
  if (points.empty()) return 0.0;
  const Eigen::Index dim = points.front().size();
  std::vector<Vector> sums(k, Vector::Zero(dim));
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    sums[assignment[i]] += points[i];
    ++counts[assignment[i]];
  }
  double sse = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Vector mean = sums[assignment[i]] / static_cast<double>(counts[assignment[i]]);
    sse += (points[i] - mean).squaredNorm();
  }
  return sse;
}

}  // namespace boxmon
