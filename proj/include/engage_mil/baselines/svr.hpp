#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "engage_mil/features/segment_feature.hpp"
#include "engage_mil/weakdata/dataset.hpp"

namespace engage::baselines {

// Gaussian kernel k(a, b) = exp(-|a - b|^2 / (2 sigma^2)).
struct KernelSpec {
  double sigma = 1.0;

  double operator()(const Eigen::Ref<const Eigen::RowVectorXd>& a,
                    const Eigen::Ref<const Eigen::RowVectorXd>& b) const;
};

struct SvrConfig {
  double C = 1.0;
  double epsilon = 0.1;
  KernelSpec kernel;
  double tol = 1e-3;          // stop when the maximal KKT violation drops below tol
  double cache_mb = 256.0;    // kernel row cache budget
  bool record_objective = false;

  void validate() const;
};

// Grid optima reported for the two k-means relabeling variants: (C, sigma) =
// (1, 1) for mode and (1, 4) for mean. Kept as presets only.
SvrConfig svr_preset_mode();
SvrConfig svr_preset_mean();

struct SvrModel {
  SvrConfig config;
  weakdata::InstanceMatrix support_vectors;  // rows with nonzero alpha - alpha*
  Eigen::VectorXd coefficients;              // alpha - alpha*, each in [-C, C]
  double bias = 0.0;
  double dual_objective = 0.0;  // maximised dual value at the solution
  std::vector<double> objective_trace;  // dual value after each step, if recorded
  std::int64_t iterations = 0;

  Eigen::Index dim() const { return support_vectors.cols(); }
};

// epsilon-SVR dual solved by SMO with second-order working-set selection
// (pairwise coordinate updates on alpha / alpha*).
SvrModel svr_train(const Eigen::Ref<const Eigen::MatrixXd>& instances,
                   std::span<const double> labels, const SvrConfig& config);

double svr_predict(const SvrModel& model, const Eigen::Ref<const Eigen::RowVectorXd>& x);
Eigen::VectorXd svr_predict_rows(const SvrModel& model, const Eigen::Ref<const Eigen::MatrixXd>& rows);

// W = -1/2 c'Kc - eps * sum(alpha + alpha*) + y'c with c = alpha - alpha*.
double svr_dual_objective(const Eigen::Ref<const Eigen::MatrixXd>& instances,
                          std::span<const double> labels, const SvrConfig& config,
                          const Eigen::VectorXd& alpha, const Eigen::VectorXd& alpha_star);

// Binary "ESVR" file plus a JSON sidecar at <path>.json.
void save_svr(const std::filesystem::path& path, const SvrModel& model,
              features::FeatureKind kind);
SvrModel load_svr(const std::filesystem::path& path);

}  // namespace engage::baselines
