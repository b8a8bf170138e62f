#pragma once

#include <cstdint>
#include <vector>

#include "boxmon/nn.hpp"

namespace boxmon {

struct KMeansOptions {
  std::size_t max_iterations = 100;
};

/// Cluster index in [0, k) for every input vector.
///
/// Seeding is k-means++ under `seed`; Lloyd iterations follow until no
/// assignment changes or `max_iterations` is reached. A cluster that loses all
/// of its points is reseeded at the point lying farthest from its assigned
/// centroid. Throws ArgumentError when k == 0 or k exceeds the point count.
std::vector<std::size_t> kmeans(const std::vector<Vector>& points, std::size_t k, std::uint64_t seed,
                                const KMeansOptions& opts = {});

/// Sum of squared distances from each point to the mean of its cluster.
double within_cluster_sse(const std::vector<Vector>& points, const std::vector<std::size_t>& assignment,
                          std::size_t k);

}  // namespace boxmon
