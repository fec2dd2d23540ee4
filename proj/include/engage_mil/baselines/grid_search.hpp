#pragma once

#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

#include "engage_mil/baselines/svr.hpp"
#include "engage_mil/weakdata/relabel.hpp"

namespace engage::baselines {

struct GridCell {
  double C = 0.0;
  double sigma = 0.0;
  double mse = 0.0;  // mean video-level MSE over held-out folds
};

struct GridSearchResult {
  double best_C = 0.0;
  double best_sigma = 0.0;
  std::vector<GridCell> table;  // |C_grid| x |sigma_grid|, C-major
};

// Subject-independent k-fold cross-validation over `train` only. The best cell
// has the lowest MSE; ties go to the smaller C, then the smaller sigma.
// `on_access`, when set, sees the video_id of every bag read.
GridSearchResult grid_search_svr(const weakdata::Dataset& train,
                                 const weakdata::InstanceLabeling& labeling,
                                 const std::vector<double>& C_grid,
                                 const std::vector<double>& sigma_grid, int folds,
                                 std::uint64_t seed, const SvrConfig& base = {},
                                 const std::function<void(std::string_view)>& on_access = {});

}  // namespace engage::baselines
