#include "engage_mil/weakdata/relabel.hpp"

#include <array>
#include <map>

#include "engage_mil/error.hpp"

namespace engage::weakdata {

std::string_view to_string(RelabelStrategy s) {
  switch (s) {
    case RelabelStrategy::kNoisy: return "noisy";
    case RelabelStrategy::kKMeansMode: return "kmeans-mode";
    case RelabelStrategy::kKMeansMean: return "kmeans-mean";
  }
  return "unknown";
}

std::optional<RelabelStrategy> parse_relabel_strategy(std::string_view name) {
  if (name == "noisy") return RelabelStrategy::kNoisy;
  if (name == "kmeans-mode") return RelabelStrategy::kKMeansMode;
  if (name == "kmeans-mean") return RelabelStrategy::kKMeansMean;
  return std::nullopt;
}

Eigen::MatrixXd stack_instances(const Dataset& data) {
  Eigen::Index rows = 0;
  for (const Bag& b : data.bags) rows += b.size();
  Eigen::MatrixXd x(rows, data.dim);
  Eigen::Index r = 0;
  for (const Bag& b : data.bags) {
    x.middleRows(r, b.size()) = b.instances;
    r += b.size();
  }
  return x;
}

InstanceLabeling relabel(const Dataset& data, RelabelStrategy strategy,
                         const std::vector<int>* assignments) {
  InstanceLabeling out;
  out.strategy = strategy;
  out.labels.reserve(data.size());
  if (strategy == RelabelStrategy::kNoisy) {
    for (const Bag& b : data.bags)
      out.labels.emplace_back(static_cast<std::size_t>(b.size()), static_cast<double>(b.label));
    return out;
  }

  std::size_t total = 0;
  for (const Bag& b : data.bags) total += static_cast<std::size_t>(b.size());
  require(assignments != nullptr && assignments->size() == total, ErrorCode::kInvalidInput,
          "cluster relabeling needs one assignment per instance");

  // Histogram of member bag labels per cluster.
  std::map<int, std::array<std::size_t, kNumLevels>> hist;
  std::size_t flat = 0;
  for (const Bag& b : data.bags) {
    require(b.label >= 0 && b.label < kNumLevels, ErrorCode::kInvalidInput, "label out of range");
    for (Eigen::Index j = 0; j < b.size(); ++j) ++hist[(*assignments)[flat++]][b.label];
  }

  std::map<int, double> cluster_label;
  for (const auto& [cluster, counts] : hist) {
    if (strategy == RelabelStrategy::kKMeansMode) {
      int mode = 0;
      for (int level = 1; level < kNumLevels; ++level)
        if (counts[level] > counts[mode]) mode = level;
      cluster_label[cluster] = mode;
    } else {
      double sum = 0.0;
      std::size_t n = 0;
      for (int level = 0; level < kNumLevels; ++level) {
        sum += static_cast<double>(level) * static_cast<double>(counts[level]);
        n += counts[level];
      }
      cluster_label[cluster] = sum / static_cast<double>(n);
    }
  }

  flat = 0;
  for (const Bag& b : data.bags) {
    std::vector<double> labels(static_cast<std::size_t>(b.size()));
    for (auto& l : labels) l = cluster_label[(*assignments)[flat++]];
    out.labels.push_back(std::move(labels));
  }
  return out;
}

}  // namespace engage::weakdata
