#include <algorithm>
#include <functional>
#include <numeric>

#include "engage_mil/deepmil/nets.hpp"
#include "engage_mil/error.hpp"

namespace engage::deepmil {

std::vector<Eigen::Index> topk_indices(std::span<const double> r, int k) {
  require(k >= 1 && static_cast<std::size_t>(k) <= r.size(), ErrorCode::kInvalidArgument,
          "top-k with k=" + std::to_string(k) + " over " + std::to_string(r.size()) + " values");
  std::vector<Eigen::Index> idx(r.size());
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::partial_sort(idx.begin(), idx.begin() + k, idx.end(), [&](Eigen::Index a, Eigen::Index b) {
    return r[a] > r[b] || (r[a] == r[b] && a < b);
  });
  idx.resize(static_cast<std::size_t>(k));
  return idx;
}

double topk_pool(std::span<const double> r, int k) {
  const auto idx = topk_indices(r, k);
  double sum = 0.0;
  for (Eigen::Index i : idx) sum += r[i];
  return sum / k;
}

// Summed in descending order, the same order topk_pool uses, so that
// mean_pool(r) == topk_pool(r, r.size()) holds bit-for-bit.
double mean_pool(std::span<const double> r) {
  require(!r.empty(), ErrorCode::kInvalidArgument, "mean pooling over an empty bag");
  std::vector<double> sorted(r.begin(), r.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double sum = 0.0;
  for (double v : sorted) sum += v;
  return sum / static_cast<double>(r.size());
}

}  // namespace engage::deepmil
