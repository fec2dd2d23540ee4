#include "engage_mil/deepmil/train.hpp"

#include <cmath>
#include <numeric>

namespace engage::deepmil {

void TrainConfig::validate() const {
  require(step > 0.0 && std::isfinite(step), ErrorCode::kInvalidArgument, "step size must be positive");
  require(epochs >= 0, ErrorCode::kInvalidArgument, "epochs must be non-negative");
  require(batch_size >= 1, ErrorCode::kInvalidArgument, "batch size must be at least 1");
  require(momentum >= 0.0 && momentum < 1.0, ErrorCode::kInvalidArgument,
          "momentum must lie in [0, 1)");
}

namespace {

template <class Net>
TrainResult<Net> train_impl(Net net, const weakdata::Dataset& data, const TrainConfig& config) {
  config.validate();
  require(!data.bags.empty(), ErrorCode::kInvalidInput, "training set is empty");
  net.label_scaling = config.label_scaling;
  const double scale = config.label_scaling ? 1.0 / kLabelRange : 1.0;

  auto params = parameter_blocks(net);
  auto velocity = zero_grad(net);
  auto vel_blocks = parameter_blocks(velocity);

  std::vector<std::size_t> order(data.bags.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(config.seed);
  std::vector<double> trace;
  trace.reserve(static_cast<std::size_t>(config.epochs));

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      auto total = zero_grad(net);
      auto total_blocks = parameter_blocks(total);
      for (std::size_t i = start; i < stop; ++i) {
        const weakdata::Bag& bag = data.bags[order[i]];
        double loss = 0.0;
        auto g = backward(net, bag, bag.label * scale, &loss);
        epoch_loss += loss;
        auto blocks = parameter_blocks(g);
        for (std::size_t b = 0; b < blocks.size(); ++b)
          for (std::size_t j = 0; j < blocks[b].size(); ++j) total_blocks[b][j] += blocks[b][j];
      }
      const double inv = 1.0 / static_cast<double>(stop - start);
      double norm2 = 0.0;
      for (auto block : total_blocks)
        for (double& v : block) {
          v *= inv;
          norm2 += v * v;
        }
      double factor = 1.0;
      const double norm = std::sqrt(norm2);
      if (config.clip_norm > 0.0 && norm > config.clip_norm) factor = config.clip_norm / norm;
      for (std::size_t b = 0; b < params.size(); ++b)
        for (std::size_t j = 0; j < params[b].size(); ++j) {
          vel_blocks[b][j] = config.momentum * vel_blocks[b][j] - config.step * factor * total_blocks[b][j];
          params[b][j] += vel_blocks[b][j];
        }
    }
    epoch_loss /= static_cast<double>(order.size());
    trace.push_back(epoch_loss);
    if (!std::isfinite(epoch_loss))
      throw TrainingDiverged("training diverged at epoch " + std::to_string(epoch + 1), trace);
  }
  return {std::move(net), std::move(trace)};
}

}  // namespace

TrainResult<MilNet> train(MilNet net, const weakdata::Dataset& data, const TrainConfig& config) {
  return train_impl(std::move(net), data, config);
}

TrainResult<SeqNet> train(SeqNet net, const weakdata::Dataset& data, const TrainConfig& config) {
  return train_impl(std::move(net), data, config);
}

}  // namespace engage::deepmil
