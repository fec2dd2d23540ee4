#include "engage_mil/weakdata/kmeans.hpp"

#include <limits>

#include "engage_mil/error.hpp"
#include "engage_mil/rng.hpp"

namespace engage::weakdata {
namespace {

using Points = Eigen::Ref<const Eigen::MatrixXd>;

double sq_dist(const Points& x, Eigen::Index i, const Eigen::MatrixXd& c, Eigen::Index j) {
  return (x.row(i) - c.row(j)).squaredNorm();
}

// Assigns every point to its nearest centroid (lowest index on ties).
// Returns the number of changed assignments and accumulates the inertia.
std::size_t assign(const Points& x, const Eigen::MatrixXd& centroids, std::vector<int>& labels,
                   std::vector<double>& best, double& inertia) {
  std::size_t changed = 0;
  inertia = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    int arg = 0;
    double d_min = sq_dist(x, i, centroids, 0);
    for (Eigen::Index j = 1; j < centroids.rows(); ++j) {
      const double d = sq_dist(x, i, centroids, j);
      if (d < d_min) {
        d_min = d;
        arg = static_cast<int>(j);
      }
    }
    if (labels[i] != arg) ++changed;
    labels[i] = arg;
    best[i] = d_min;
    inertia += d_min;
  }
  return changed;
}

Eigen::MatrixXd seed_centroids(const Points& x, int k, Rng& rng) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd c(k, x.cols());
  c.row(0) = x.row(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n))));
  std::vector<double> d2(n);
  for (Eigen::Index i = 0; i < n; ++i) d2[i] = sq_dist(x, i, c, 0);
  for (int j = 1; j < k; ++j) {
    double total = 0.0;
    for (double d : d2) total += d;
    Eigen::Index pick = 0;
    if (total > 0.0) {
      const double r = rng.uniform() * total;
      double acc = 0.0;
      pick = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += d2[i];
        if (r < acc && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      // All remaining points coincide with chosen centroids.
      pick = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
    }
    c.row(j) = x.row(pick);
    for (Eigen::Index i = 0; i < n; ++i) d2[i] = std::min(d2[i], sq_dist(x, i, c, j));
  }
  return c;
}

}  // namespace

KMeansResult kmeans(const Points& points, int k, std::uint64_t seed,
                    const KMeansOptions& options) {
  require(k >= 1 && k <= points.rows(), ErrorCode::kInvalidK,
          "k=" + std::to_string(k) + " with " + std::to_string(points.rows()) + " points");
  require(points.allFinite(), ErrorCode::kInvalidInput, "non-finite point");
  const Eigen::Index n = points.rows();
  Rng rng(seed);

  KMeansResult res;
  res.centroids = seed_centroids(points, k, rng);
  res.assignments.assign(n, -1);
  std::vector<double> best(n, 0.0);
  assign(points, res.centroids, res.assignments, best, res.inertia);
  res.inertia_trace.push_back(res.inertia);

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    // Update step: centroid = mean of members.
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
    std::vector<Eigen::Index> counts(k, 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(res.assignments[i]) += points.row(i);
      ++counts[res.assignments[i]];
    }
    std::vector<bool> taken(n, false);
    for (int j = 0; j < k; ++j) {
      if (counts[j] > 0) {
        res.centroids.row(j) = sums.row(j) / static_cast<double>(counts[j]);
        continue;
      }
      Eigen::Index far = 0;
      double far_d = -1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (!taken[i] && best[i] > far_d) {
          far_d = best[i];
          far = i;
        }
      }
      taken[far] = true;
      res.centroids.row(j) = points.row(far);
    }
    ++res.iterations;

    const std::size_t changed = assign(points, res.centroids, res.assignments, best, res.inertia);
    res.inertia_trace.push_back(res.inertia);
    if (changed == 0) break;
  }
  return res;
}

}  // namespace engage::weakdata
