#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "engage_mil/weakdata/dataset.hpp"

namespace engage::weakdata {

enum class RelabelStrategy { kNoisy, kKMeansMode, kKMeansMean };

std::string_view to_string(RelabelStrategy s);
std::optional<RelabelStrategy> parse_relabel_strategy(std::string_view name);

struct InstanceLabeling {
  RelabelStrategy strategy = RelabelStrategy::kNoisy;
  std::vector<std::vector<double>> labels;  // [bag][instance]
};

// All instances of `data`, bag-major, as rows of one matrix.
Eigen::MatrixXd stack_instances(const Dataset& data);

// `assignments` is one cluster id per stacked instance (bag-major) and is
// required for the k-means strategies. Mode ties go to the smaller label.
InstanceLabeling relabel(const Dataset& data, RelabelStrategy strategy,
                         const std::vector<int>* assignments = nullptr);

}  // namespace engage::weakdata
