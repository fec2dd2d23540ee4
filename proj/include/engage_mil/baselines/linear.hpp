#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"

namespace engage::baselines {

struct LinearModel {
  Eigen::VectorXd weights;
  double bias = 0.0;

  double predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
};

struct SgdConfig {
  double penalty = 1e-4;  // lambda in  mean((w.x + b - y)^2) + lambda |w|^2
  int epochs = 50;
  double eta0 = 0.01;     // step_t = eta0 / (1 + eta0 * lambda * t)
  std::uint64_t seed = 0;
};

struct SgdResult {
  LinearModel model;
  std::vector<double> loss_trace;  // full objective after each epoch
};

double linear_objective(const LinearModel& model, const Eigen::Ref<const Eigen::MatrixXd>& x,
                        std::span<const double> y, double penalty);

SgdResult sgd_linear_train(const Eigen::Ref<const Eigen::MatrixXd>& instances,
                           std::span<const double> labels, const SgdConfig& config);

struct RidgePosterior {
  Eigen::VectorXd mean;
  double bias = 0.0;
  double alpha = 1.0;  // weight precision
  double beta = 1.0;   // noise precision
  int iterations = 0;

  double predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
};

struct BayesianRidgeConfig {
  int max_iter = 300;
  double tol = 1e-6;  // relative change of alpha and beta
  double alpha_init = 1.0;
  double beta_init = 1.0;
  double floor = 1e-10;
};

// Evidence maximisation on centred data; m = beta (beta X'X + alpha I)^-1 X'y and
// the intercept recovers the centring.
RidgePosterior bayesian_ridge_train(const Eigen::Ref<const Eigen::MatrixXd>& instances,
                                    std::span<const double> labels,
                                    const BayesianRidgeConfig& config = {});

// Mean of a video's segment predictions.
double aggregate_video(std::span<const double> instance_predictions);

nlohmann::json to_json(const LinearModel& m);
nlohmann::json to_json(const RidgePosterior& m);
LinearModel linear_from_json(const nlohmann::json& j);
RidgePosterior ridge_from_json(const nlohmann::json& j);

}  // namespace engage::baselines
