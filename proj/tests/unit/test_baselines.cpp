#include <cmath>
#include <numeric>
#include <set>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "engage_mil/baselines/grid_search.hpp"
#include "engage_mil/baselines/linear.hpp"
#include "engage_mil/baselines/svr.hpp"
#include "engage_mil/error.hpp"
#include "engage_mil/rng.hpp"
#include "engage_mil/weakdata/relabel.hpp"
#include "engage_mil/weakdata/synth.hpp"
#include "support/qp_oracle.hpp"
#include "support/tempdir.hpp"

using namespace engage;
using namespace engage::baselines;

namespace {

Eigen::MatrixXd random_matrix(Eigen::Index n, Eigen::Index d, Rng& rng) {
  Eigen::MatrixXd x(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = rng.normal();
  return x;
}

// Closed-form minimiser of mean((Xw + b - y)^2) + lambda |w|^2.
std::pair<Eigen::VectorXd, double> ridge_closed_form(const Eigen::MatrixXd& X,
                                                     const std::vector<double>& y, double lambda) {
  const double n = static_cast<double>(X.rows());
  const Eigen::RowVectorXd mx = X.colwise().mean();
  const Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(y.data(), X.rows());
  const double my = yv.mean();
  const Eigen::MatrixXd Xc = X.rowwise() - mx;
  const Eigen::VectorXd yc = yv.array() - my;
  const Eigen::MatrixXd A =
      Xc.transpose() * Xc / n + lambda * Eigen::MatrixXd::Identity(X.cols(), X.cols());
  const Eigen::VectorXd w = A.ldlt().solve(Xc.transpose() * yc / n);
  return {w, my - mx.dot(w)};
}

}  // namespace

TEST(Svr, ConstantTargetsPredictConstant) {
  Rng rng(1);
  const auto X = random_matrix(15, 3, rng);
  const std::vector<double> y(15, 2.0);
  const auto model = svr_train(X, y, {});
  for (Eigen::Index i = 0; i < 15; ++i) EXPECT_NEAR(svr_predict(model, X.row(i)), 2.0, 0.1 + 1e-9);
  EXPECT_NEAR(svr_predict(model, random_matrix(1, 3, rng).row(0)), 2.0, 0.1 + 1e-9);
}

TEST(Svr, MatchesDenseQpOracleOnToySet) {
  Rng rng(2);
  Eigen::MatrixXd X(12, 1);
  std::vector<double> y(12);
  for (int i = 0; i < 12; ++i) {
    X(i, 0) = -2.0 + 4.0 * i / 11.0;
    y[i] = std::sin(2.0 * X(i, 0)) + 0.1 * rng.normal();
  }
  SvrConfig cfg;
  cfg.C = 2.0;
  cfg.epsilon = 0.1;
  cfg.kernel.sigma = 0.7;
  cfg.tol = 1e-9;
  const auto model = svr_train(X, y, cfg);
  const auto qp = engage::testing::solve_svr_qp(X, y, cfg.C, cfg.epsilon, cfg.kernel.sigma);
  EXPECT_NEAR(model.dual_objective, qp.dual_objective, 1e-6);
  for (int i = 0; i < 12; ++i)
    EXPECT_NEAR(svr_predict(model, X.row(i)),
                engage::testing::qp_predict(qp, X, X.row(i), cfg.kernel.sigma), 1e-6);
}

TEST(Svr, RandomInstancesMatchOracle) {
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::Index n = 5 + static_cast<Eigen::Index>(rng.below(21));
    const auto X = random_matrix(n, 1 + rng.below(4), rng);
    std::vector<double> y(n);
    for (double& v : y) v = rng.uniform(0, 3);
    SvrConfig cfg;
    cfg.C = rng.uniform(0.2, 5.0);
    cfg.epsilon = rng.uniform(0.0, 0.3);
    cfg.kernel.sigma = rng.uniform(0.5, 3.0);
    cfg.tol = 1e-8;
    const auto model = svr_train(X, y, cfg);
    const auto qp = engage::testing::solve_svr_qp(X, y, cfg.C, cfg.epsilon, cfg.kernel.sigma);
    EXPECT_NEAR(model.dual_objective, qp.dual_objective, 1e-6) << "trial " << trial;
    for (Eigen::Index s = 0; s < model.coefficients.size(); ++s) {
      EXPECT_LE(std::abs(model.coefficients[s]), cfg.C + 1e-12);
    }
  }
}

TEST(Svr, DualObjectiveNeverDecreases) {
  Rng rng(4);
  const auto X = random_matrix(20, 2, rng);
  std::vector<double> y(20);
  for (double& v : y) v = rng.uniform(0, 3);
  SvrConfig cfg;
  cfg.record_objective = true;
  const auto model = svr_train(X, y, cfg);
  ASSERT_FALSE(model.objective_trace.empty());
  for (std::size_t i = 1; i < model.objective_trace.size(); ++i)
    EXPECT_GE(model.objective_trace[i], model.objective_trace[i - 1] - 1e-12);
}

TEST(Svr, InterpolatesTrainingPointsWithinTube) {
  Rng rng(5);
  const auto X = random_matrix(10, 2, rng);
  std::vector<double> y(10);
  for (Eigen::Index i = 0; i < 10; ++i) y[i] = X(i, 0) - 0.5 * X(i, 1);
  SvrConfig cfg;
  cfg.C = 1000.0;
  cfg.kernel.sigma = 1.0;
  cfg.tol = 1e-6;
  const auto model = svr_train(X, y, cfg);
  for (Eigen::Index i = 0; i < 10; ++i) EXPECT_LE(std::abs(svr_predict(model, X.row(i)) - y[i]), 0.1 + 1e-4);
}

TEST(Svr, WideKernelApproachesBias) {
  Rng rng(6);
  Eigen::MatrixXd X = random_matrix(12, 2, rng);
  X.rowwise() -= X.colwise().mean();
  std::vector<double> y(12);
  for (double& v : y) v = rng.uniform(0, 3);
  SvrConfig cfg;
  cfg.kernel.sigma = 1e4;
  const auto model = svr_train(X, y, cfg);
  // K -> all ones, so f(x) -> sum(coef) + b = b (equality constraint).
  EXPECT_NEAR(svr_predict(model, random_matrix(1, 2, rng).row(0)), model.bias, 1e-6);
}

TEST(Svr, DeterministicAndDimensionChecked) {
  Rng rng(7);
  const auto X = random_matrix(8, 2, rng);
  std::vector<double> y(8, 1.0);
  y[3] = 2.0;
  const auto model = svr_train(X, y, {});
  EXPECT_EQ(svr_predict(model, X.row(3)), svr_predict(model, X.row(3)));
  EXPECT_THROW(svr_predict(model, random_matrix(1, 3, rng).row(0)), Error);
}

TEST(Svr, RejectsNonFiniteAndBadConfig) {
  Rng rng(8);
  auto X = random_matrix(5, 2, rng);
  std::vector<double> y(5, 1.0);
  X(2, 1) = std::nan("");
  EXPECT_THROW(svr_train(X, y, {}), Error);
  SvrConfig bad;
  bad.C = 0.0;
  EXPECT_THROW(svr_train(random_matrix(5, 2, rng), y, bad), Error);
}

TEST(Svr, PresetsAreRecorded) {
  EXPECT_EQ(svr_preset_mode().C, 1.0);
  EXPECT_EQ(svr_preset_mode().kernel.sigma, 1.0);
  EXPECT_EQ(svr_preset_mean().C, 1.0);
  EXPECT_EQ(svr_preset_mean().kernel.sigma, 4.0);
}

TEST(Svr, SaveLoadRoundTrip) {
  engage::testing::TempDir dir;
  Rng rng(9);
  const auto X = random_matrix(10, 3, rng);
  std::vector<double> y(10);
  for (double& v : y) v = rng.uniform(0, 3);
  const auto model = svr_train(X, y, {});
  save_svr(dir.path() / "m.esvr", model, features::FeatureKind::kPoseGaze);
  const auto loaded = load_svr(dir.path() / "m.esvr");
  const auto q = random_matrix(1, 3, rng);
  // Support vectors are stored as float32.
  EXPECT_NEAR(svr_predict(loaded, q.row(0)), svr_predict(model, q.row(0)), 1e-5);
}

TEST(SgdLinear, RecoversRealizableWeights) {
  Rng rng(10);
  const auto X = random_matrix(50, 3, rng);
  const Eigen::Vector3d w(1.5, -0.5, 0.25);
  std::vector<double> y(50);
  for (Eigen::Index i = 0; i < 50; ++i) y[i] = X.row(i).dot(w) + 0.7;
  SgdConfig cfg;
  cfg.penalty = 0.0;
  cfg.epochs = 500;
  cfg.eta0 = 0.05;
  const auto result = sgd_linear_train(X, y, cfg);
  EXPECT_LT((result.model.weights - w).lpNorm<Eigen::Infinity>(), 1e-3);
  EXPECT_NEAR(result.model.bias, 0.7, 1e-3);
}

TEST(SgdLinear, ZeroEpochsReturnsZeroModel) {
  Rng rng(11);
  const auto X = random_matrix(5, 2, rng);
  SgdConfig cfg;
  cfg.epochs = 0;
  const auto result = sgd_linear_train(X, std::vector<double>(5, 1.0), cfg);
  EXPECT_TRUE(result.model.weights.isZero(0.0));
  EXPECT_EQ(result.model.bias, 0.0);
  EXPECT_TRUE(result.loss_trace.empty());
}

TEST(SgdLinear, ConvergesToClosedFormRidge) {
  Rng rng(12);
  for (int trial = 0; trial < 5; ++trial) {
    const auto X = random_matrix(20, 3, rng);
    std::vector<double> y(20);
    for (Eigen::Index i = 0; i < 20; ++i) y[i] = X(i, 0) - 2.0 * X(i, 2) + 0.3 * rng.normal() + 1.0;
    SgdConfig cfg;
    cfg.penalty = 0.1;
    cfg.epochs = 3000;
    cfg.eta0 = 0.01;
    cfg.seed = trial;
    const auto result = sgd_linear_train(X, y, cfg);
    const auto [w, b] = ridge_closed_form(X, y, cfg.penalty);
    EXPECT_LT((result.model.weights - w).lpNorm<Eigen::Infinity>(), 1e-3) << "trial " << trial;
    LinearModel oracle{w, b};
    const double best = linear_objective(oracle, X, y, cfg.penalty);
    EXPECT_LE(linear_objective(result.model, X, y, cfg.penalty), best * 1.01);
  }
}

TEST(SgdLinear, LossTraceDecreasesOnAverage) {
  Rng rng(13);
  const auto X = random_matrix(40, 3, rng);
  std::vector<double> y(40);
  for (Eigen::Index i = 0; i < 40; ++i) y[i] = X(i, 1) + 0.2 * rng.normal();
  SgdConfig cfg;
  cfg.epochs = 40;
  const auto trace = sgd_linear_train(X, y, cfg).loss_trace;
  ASSERT_EQ(trace.size(), 40u);
  const double first = std::accumulate(trace.begin(), trace.begin() + 10, 0.0);
  const double last = std::accumulate(trace.end() - 10, trace.end(), 0.0);
  EXPECT_LT(last, first);
}

TEST(BayesianRidge, NoiselessDataRecoversWeights) {
  Rng rng(14);
  const auto X = random_matrix(60, 4, rng);
  const Eigen::Vector4d w(0.5, -1.0, 2.0, 0.0);
  std::vector<double> y(60);
  for (Eigen::Index i = 0; i < 60; ++i) y[i] = X.row(i).dot(w) + 1.5;
  const auto post = bayesian_ridge_train(X, y);
  EXPECT_LT((post.mean - w).lpNorm<Eigen::Infinity>(), 1e-3);
  EXPECT_NEAR(post.bias, 1.5, 1e-3);
  EXPECT_GT(post.beta, 1e3);
}

TEST(BayesianRidge, PosteriorMeanMatchesDirectSolveAtConvergedHyperparameters) {
  Rng rng(15);
  const auto X = random_matrix(40, 3, rng);
  std::vector<double> y(40);
  for (Eigen::Index i = 0; i < 40; ++i) y[i] = X(i, 0) + 0.5 * rng.normal();
  const auto post = bayesian_ridge_train(X, y);
  const Eigen::MatrixXd Xc = X.rowwise() - X.colwise().mean();
  const Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(y.data(), 40);
  const Eigen::VectorXd yc = yv.array() - yv.mean();
  const Eigen::MatrixXd A = post.beta * Xc.transpose() * Xc + post.alpha * Eigen::MatrixXd::Identity(3, 3);
  const Eigen::VectorXd m = post.beta * A.ldlt().solve(Xc.transpose() * yc);
  EXPECT_LT((post.mean - m).lpNorm<Eigen::Infinity>(), 1e-8);
  // Evidence fixed point: gamma = sum beta l / (beta l + alpha), alpha = gamma / |m|^2.
  const Eigen::VectorXd l = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(Xc.transpose() * Xc).eigenvalues();
  const double gamma = (post.beta * l.array() / (post.beta * l.array() + post.alpha)).sum();
  EXPECT_NEAR(post.alpha, gamma / m.squaredNorm(), 1e-4 * post.alpha);
  EXPECT_NEAR(post.beta, (40.0 - gamma) / (yc - Xc * m).squaredNorm(), 1e-4 * post.beta);
}

TEST(BayesianRidge, PureNoiseGivesSmallMean) {
  Rng rng(16);
  const auto X = random_matrix(200, 3, rng);
  std::vector<double> y(200);
  for (double& v : y) v = rng.normal();
  const auto post = bayesian_ridge_train(X, y);
  const Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(y.data(), 200);
  EXPECT_LT(post.mean.norm(), 0.1 * yv.norm() / X.norm());
}

TEST(BayesianRidge, ZeroFeatureGivesZeroMean) {
  const Eigen::MatrixXd X = Eigen::MatrixXd::Zero(10, 1);
  std::vector<double> y = {0, 1, 2, 3, 1, 2, 0, 1, 3, 2};
  const auto post = bayesian_ridge_train(X, y);
  EXPECT_EQ(post.mean[0], 0.0);
  EXPECT_NEAR(post.bias, 1.5, 1e-12);
}

TEST(Aggregate, Values) {
  EXPECT_EQ(aggregate_video(std::vector<double>{2, 2, 2}), 2.0);
  EXPECT_EQ(aggregate_video(std::vector<double>{0, 3}), 1.5);
  EXPECT_THROW(aggregate_video(std::vector<double>{}), Error);
}

TEST(Aggregate, MatchesReverseOrderSum) {
  Rng rng(17);
  std::vector<double> p(100);
  for (double& v : p) v = rng.uniform(0, 3);
  double reverse = 0.0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) reverse += *it;
  EXPECT_NEAR(aggregate_video(p), reverse / 100.0, 1e-14);
  auto shuffled = p;
  rng.shuffle(shuffled);
  EXPECT_NEAR(aggregate_video(shuffled), aggregate_video(p), 1e-14);
}

TEST(LinearJson, RoundTrip) {
  LinearModel m{Eigen::Vector2d(0.25, -1.0), 0.5};
  const auto back = linear_from_json(to_json(m));
  EXPECT_EQ(back.weights, m.weights);
  EXPECT_EQ(back.bias, m.bias);
  RidgePosterior r;
  r.mean = Eigen::Vector2d(1.0, 2.0);
  r.bias = 0.1;
  r.alpha = 3.0;
  r.beta = 4.0;
  const auto rb = ridge_from_json(to_json(r));
  EXPECT_EQ(rb.mean, r.mean);
  EXPECT_EQ(rb.alpha, 3.0);
  EXPECT_EQ(rb.beta, 4.0);
}

namespace {

weakdata::Dataset small_dataset(double noise, std::uint64_t seed) {
  weakdata::SyntheticSpec spec;
  spec.subjects = 8;
  spec.videos = 16;
  spec.M = 5;
  spec.dim = 3;
  spec.class_distribution = {0.25, 0.25, 0.25, 0.25};
  spec.signal_fraction = 1.0;
  spec.noise_scale = noise;
  spec.seed = seed;
  return weakdata::synth_generate(spec).dataset;
}

}  // namespace

TEST(GridSearch, SingleCellIsReturned) {
  const auto data = small_dataset(0.3, 1);
  const auto labeling = weakdata::relabel(data, weakdata::RelabelStrategy::kNoisy);
  const auto result = grid_search_svr(data, labeling, {2.0}, {0.5}, 3, 1);
  EXPECT_EQ(result.best_C, 2.0);
  EXPECT_EQ(result.best_sigma, 0.5);
  ASSERT_EQ(result.table.size(), 1u);
}

TEST(GridSearch, TableShapeAndFinite) {
  const auto data = small_dataset(0.3, 2);
  const auto labeling = weakdata::relabel(data, weakdata::RelabelStrategy::kNoisy);
  const auto result = grid_search_svr(data, labeling, {0.1, 1.0, 10.0}, {0.5, 2.0}, 4, 2);
  ASSERT_EQ(result.table.size(), 6u);
  for (const auto& cell : result.table) EXPECT_TRUE(std::isfinite(cell.mse));
}

TEST(GridSearch, InterpolatingCellWins) {
  // A little noise so held-out instances are not exact copies of training ones.
  const auto data = small_dataset(0.02, 3);
  const auto labeling = weakdata::relabel(data, weakdata::RelabelStrategy::kNoisy);
  // Tiny C with a needle kernel cannot fit; C=100 with a matched kernel can.
  const auto result = grid_search_svr(data, labeling, {1e-3, 100.0}, {1e-3, 2.0}, 4, 3);
  EXPECT_EQ(result.best_C, 100.0);
  EXPECT_EQ(result.best_sigma, 2.0);
}

TEST(GridSearch, RejectsTooManyFolds) {
  const auto data = small_dataset(0.3, 4);
  const auto labeling = weakdata::relabel(data, weakdata::RelabelStrategy::kNoisy);
  try {
    grid_search_svr(data, labeling, {1.0}, {1.0}, 9, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidFolds);
  }
}

TEST(GridSearch, OnlyTouchesTrainingBags) {
  const auto data = small_dataset(0.3, 5);
  const auto [train, test] = weakdata::split_subject_independent(data, 0.25, 5);
  std::set<std::string> train_ids, seen;
  for (const auto& b : train.bags) train_ids.insert(b.video_id);
  const auto labeling = weakdata::relabel(train, weakdata::RelabelStrategy::kNoisy);
  grid_search_svr(train, labeling, {1.0}, {1.0}, 3, 1, {},
                  [&](std::string_view id) { seen.insert(std::string(id)); });
  EXPECT_EQ(seen, train_ids);
  for (const auto& b : test.bags) EXPECT_EQ(seen.count(b.video_id), 0u);
}
