#pragma once

#include <array>
#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "engage_mil/features/segment_feature.hpp"

namespace engage::weakdata {

inline constexpr int kNumLevels = 4;

// Rows are instances (temporal order), columns are feature dimensions.
using InstanceMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Bag {
  std::string video_id;
  std::string subject_id;
  InstanceMatrix instances;
  int label = 0;

  Eigen::Index size() const { return instances.rows(); }
  Eigen::Index dim() const { return instances.cols(); }
};

struct Dataset {
  std::vector<Bag> bags;
  features::FeatureKind kind = features::FeatureKind::kPoseGaze;
  Eigen::Index M = 0;
  Eigen::Index dim = 0;

  std::size_t size() const { return bags.size(); }
  // Throws invalid-input if bags disagree on M or dimension, or a label is outside 0..3.
  void validate() const;
  std::set<std::string> subjects() const;
  std::vector<int> labels() const;
  // Same kind/M/dim, no bags.
  Dataset empty_like() const;
};

// Indices of the `count` source segments kept when resampling to M instances:
// floor(i * count / M). Even spacing when count > M; each segment repeated
// in place (order preserved) when count < M.
std::vector<std::size_t> resample_indices(std::size_t count, std::size_t M);

Bag make_bag(const std::vector<features::SegmentFeature>& segments, std::size_t M,
             std::string video_id, std::string subject_id, int label);

// Partitions subjects, not videos. The test side holds the reachable video
// total closest to round(test_fraction * N) (both sides non-empty); among
// subsets with that total, subjects earlier in a seed-shuffled order are
// preferred.
std::pair<Dataset, Dataset> split_subject_independent(const Dataset& data, double test_fraction,
                                                      std::uint64_t seed);

// Copies per class: level 0 -> 20, level 3 -> 2, otherwise 1.
inline constexpr std::array<int, kNumLevels> kAugmentCopies = {20, 1, 1, 2};
Dataset augment(const Dataset& train);

}  // namespace engage::weakdata
