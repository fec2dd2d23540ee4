#include "engage_mil/baselines/linear.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "engage_mil/error.hpp"
#include "engage_mil/rng.hpp"

namespace engage::baselines {

double LinearModel::predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  require(x.size() == weights.size(), ErrorCode::kDimensionMismatch, "linear model dimension");
  return x.dot(weights) + bias;
}

double RidgePosterior::predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  require(x.size() == mean.size(), ErrorCode::kDimensionMismatch, "ridge model dimension");
  return x.dot(mean) + bias;
}

double linear_objective(const LinearModel& model, const Eigen::Ref<const Eigen::MatrixXd>& x,
                        std::span<const double> y, double penalty) {
  double sse = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double r = x.row(i).dot(model.weights) + model.bias - y[i];
    sse += r * r;
  }
  return sse / static_cast<double>(x.rows()) + penalty * model.weights.squaredNorm();
}

SgdResult sgd_linear_train(const Eigen::Ref<const Eigen::MatrixXd>& instances,
                           std::span<const double> labels, const SgdConfig& config) {
  const Eigen::Index n = instances.rows();
  require(n >= 1, ErrorCode::kInvalidInput, "SGD needs at least one instance");
  require(static_cast<Eigen::Index>(labels.size()) == n, ErrorCode::kDimensionMismatch,
          "one label per instance required");
  require(config.eta0 > 0.0 && config.penalty >= 0.0 && config.epochs >= 0,
          ErrorCode::kInvalidArgument, "invalid SGD configuration");

  SgdResult res;
  res.model.weights = Eigen::VectorXd::Zero(instances.cols());
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  Rng rng(config.seed);
  double t = 0.0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    for (Eigen::Index i : order) {
      const double eta = config.eta0 / (1.0 + config.eta0 * config.penalty * t);
      const double r = instances.row(i).dot(res.model.weights) + res.model.bias - labels[i];
      res.model.weights -= eta * (2.0 * r * instances.row(i).transpose() +
                                  2.0 * config.penalty * res.model.weights);
      res.model.bias -= eta * 2.0 * r;
      t += 1.0;
    }
    res.loss_trace.push_back(linear_objective(res.model, instances, labels, config.penalty));
  }
  return res;
}

RidgePosterior bayesian_ridge_train(const Eigen::Ref<const Eigen::MatrixXd>& instances,
                                    std::span<const double> labels,
                                    const BayesianRidgeConfig& config) {
  const Eigen::Index n = instances.rows();
  const Eigen::Index d = instances.cols();
  require(n >= 1, ErrorCode::kInvalidInput, "Bayesian ridge needs at least one instance");
  require(static_cast<Eigen::Index>(labels.size()) == n, ErrorCode::kDimensionMismatch,
          "one label per instance required");

  const Eigen::Map<const Eigen::VectorXd> y(labels.data(), n);
  const Eigen::RowVectorXd x_mean = instances.colwise().mean();
  const double y_mean = y.mean();
  const Eigen::MatrixXd xc = instances.rowwise() - x_mean;
  const Eigen::VectorXd yc = y.array() - y_mean;

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(xc.transpose() * xc);
  const Eigen::VectorXd s = eig.eigenvalues().cwiseMax(0.0);
  const Eigen::MatrixXd& v = eig.eigenvectors();
  const Eigen::VectorXd vty = v.transpose() * (xc.transpose() * yc);

  constexpr double kCeiling = 1e12;
  auto clamp = [&](double h) { return std::clamp(h, config.floor, kCeiling); };
  auto posterior_mean = [&](double alpha, double beta) -> Eigen::VectorXd {
    return v * (beta * vty.array() / (beta * s.array() + alpha)).matrix();
  };

  RidgePosterior post;
  post.alpha = config.alpha_init;
  post.beta = config.beta_init;
  for (post.iterations = 0; post.iterations < config.max_iter;) {
    const Eigen::VectorXd m = posterior_mean(post.alpha, post.beta);
    const double gamma = (post.beta * s.array() / (post.alpha + post.beta * s.array())).sum();
    const double rss = (yc - xc * m).squaredNorm();
    const double alpha_new = clamp(gamma / std::max(m.squaredNorm(), config.floor));
    const double beta_new =
        clamp((static_cast<double>(n) - gamma) / std::max(rss, config.floor));
    ++post.iterations;
    const bool done = std::abs(alpha_new - post.alpha) <= config.tol * post.alpha &&
                      std::abs(beta_new - post.beta) <= config.tol * post.beta;
    post.alpha = alpha_new;
    post.beta = beta_new;
    if (done) break;
  }
  post.mean = d > 0 ? posterior_mean(post.alpha, post.beta) : Eigen::VectorXd();
  post.bias = y_mean - x_mean.dot(post.mean);
  return post;
}

double aggregate_video(std::span<const double> instance_predictions) {
  require(!instance_predictions.empty(), ErrorCode::kInvalidInput, "no segment predictions");
  double sum = 0.0;
  for (double p : instance_predictions) sum += p;
  return sum / static_cast<double>(instance_predictions.size());
}

nlohmann::json to_json(const LinearModel& m) {
  return {{"model", "sgd"},
          {"weights", std::vector<double>(m.weights.data(), m.weights.data() + m.weights.size())},
          {"bias", m.bias}};
}

nlohmann::json to_json(const RidgePosterior& m) {
  return {{"model", "ridge"},
          {"weights", std::vector<double>(m.mean.data(), m.mean.data() + m.mean.size())},
          {"bias", m.bias},
          {"alpha", m.alpha},
          {"beta", m.beta},
          {"iterations", m.iterations}};
}

LinearModel linear_from_json(const nlohmann::json& j) {
  try {
    const auto w = j.at("weights").get<std::vector<double>>();
    LinearModel m;
    m.weights = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
    m.bias = j.at("bias").get<double>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kParseError, std::string("linear model: ") + e.what());
  }
}

RidgePosterior ridge_from_json(const nlohmann::json& j) {
  try {
    const auto w = j.at("weights").get<std::vector<double>>();
    RidgePosterior m;
    m.mean = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
    m.bias = j.at("bias").get<double>();
    m.alpha = j.at("alpha").get<double>();
    m.beta = j.at("beta").get<double>();
    m.iterations = j.value("iterations", 0);
    return m;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kParseError, std::string("ridge model: ") + e.what());
  }
}

}  // namespace engage::baselines
