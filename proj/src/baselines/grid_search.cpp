#include "engage_mil/baselines/grid_search.hpp"

#include <algorithm>
#include <map>

#include "engage_mil/baselines/linear.hpp"
#include "engage_mil/error.hpp"
#include "engage_mil/rng.hpp"

namespace engage::baselines {

GridSearchResult grid_search_svr(const weakdata::Dataset& train,
                                 const weakdata::InstanceLabeling& labeling,
                                 const std::vector<double>& C_grid,
                                 const std::vector<double>& sigma_grid, int folds,
                                 std::uint64_t seed, const SvrConfig& base,
                                 const std::function<void(std::string_view)>& on_access) {
  require(!C_grid.empty() && !sigma_grid.empty(), ErrorCode::kInvalidArgument, "empty grid");
  require(labeling.labels.size() == train.size(), ErrorCode::kInvalidInput,
          "labeling does not match the dataset");
  const auto subject_set = train.subjects();
  require(folds >= 2 && static_cast<std::size_t>(folds) <= subject_set.size(),
          ErrorCode::kInvalidFolds,
          std::to_string(folds) + " folds over " + std::to_string(subject_set.size()) + " subjects");

  std::vector<std::string> subjects(subject_set.begin(), subject_set.end());
  Rng rng(seed);
  rng.shuffle(subjects);
  std::map<std::string, int> fold_of;
  for (std::size_t s = 0; s < subjects.size(); ++s) fold_of[subjects[s]] = static_cast<int>(s) % folds;

  // Per-fold training matrices do not depend on the grid cell.
  struct Fold {
    Eigen::MatrixXd x;
    std::vector<double> y;
    std::vector<std::size_t> held_out;
  };
  std::vector<Fold> split(folds);
  for (int f = 0; f < folds; ++f) {
    Eigen::Index rows = 0;
    for (std::size_t b = 0; b < train.size(); ++b) {
      if (fold_of[train.bags[b].subject_id] == f) split[f].held_out.push_back(b);
      else rows += train.bags[b].size();
    }
    split[f].x.resize(rows, train.dim);
    Eigen::Index r = 0;
    for (std::size_t b = 0; b < train.size(); ++b) {
      if (fold_of[train.bags[b].subject_id] == f) continue;
      if (on_access) on_access(train.bags[b].video_id);
      const auto& bag = train.bags[b];
      split[f].x.middleRows(r, bag.size()) = bag.instances;
      split[f].y.insert(split[f].y.end(), labeling.labels[b].begin(), labeling.labels[b].end());
      r += bag.size();
    }
  }

  GridSearchResult result;
  bool have_best = false;
  double best_mse = 0.0;
  for (double C : C_grid) {
    for (double sigma : sigma_grid) {
      SvrConfig cfg = base;
      cfg.C = C;
      cfg.kernel.sigma = sigma;
      double sse = 0.0;
      std::size_t count = 0;
      for (const Fold& fold : split) {
        const SvrModel model = svr_train(fold.x, fold.y, cfg);
        for (std::size_t b : fold.held_out) {
          if (on_access) on_access(train.bags[b].video_id);
          const Eigen::VectorXd pred = svr_predict_rows(model, train.bags[b].instances);
          const double video = aggregate_video({pred.data(), static_cast<std::size_t>(pred.size())});
          const double err = video - train.bags[b].label;
          sse += err * err;
          ++count;
        }
      }
      const double mse = sse / static_cast<double>(count);
      result.table.push_back({C, sigma, mse});
      const bool better = !have_best || mse < best_mse ||
                          (mse == best_mse && (C < result.best_C ||
                                               (C == result.best_C && sigma < result.best_sigma)));
      if (better) {
        have_best = true;
        best_mse = mse;
        result.best_C = C;
        result.best_sigma = sigma;
      }
    }
  }
  return result;
}

}  // namespace engage::baselines
