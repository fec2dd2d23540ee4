#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace engage::weakdata {

struct KMeansResult {
  std::vector<int> assignments;
  Eigen::MatrixXd centroids;  // k x D
  double inertia = 0.0;
  // Inertia after the seeding assignment, then after each Lloyd iteration.
  std::vector<double> inertia_trace;
  int iterations = 0;
};

struct KMeansOptions {
  int max_iterations = 300;
};

// Lloyd's algorithm with distance-weighted (k-means++) seeding drawn from
// `seed`. Points are rows. An emptied cluster is re-seeded at the point farthest
// from its centroid. Throws invalid-k unless 1 <= k <= rows.
KMeansResult kmeans(const Eigen::Ref<const Eigen::MatrixXd>& points, int k, std::uint64_t seed,
                    const KMeansOptions& options = {});

}  // namespace engage::weakdata
