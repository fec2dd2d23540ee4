#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "engage_mil/deepmil/layers.hpp"
#include "engage_mil/weakdata/dataset.hpp"

namespace engage::deepmil {

inline constexpr double kLabelRange = 3.0;

enum class PoolingKind { kTopK, kMean };

struct Pooling {
  PoolingKind kind = PoolingKind::kMean;
  int k = 10;
};

// Mean of the k largest entries. Throws invalid-argument unless 1 <= k <= size.
double topk_pool(std::span<const double> r, int k);
double mean_pool(std::span<const double> r);
// Indices of the k largest entries; among equal values the lower index wins.
std::vector<Eigen::Index> topk_indices(std::span<const double> r, int k);

inline double mil_loss(double pred, double label) { return (pred - label) * (pred - label); }

// Dense MIL ranking network: every instance runs through the same dense stack,
// the last stage emits one intensity per instance, pooling gives the bag score.
struct MilNet {
  std::vector<DenseLayer> layers;
  Pooling pooling;
  bool label_scaling = true;  // scores live in [0,1]; reported values are x3

  Eigen::Index input_dim() const { return layers.front().in(); }
};

struct MilNetGrad {
  std::vector<DenseGrad> layers;
};

struct MilNetSpec {
  std::vector<int> hidden = {128, 64, 32};
  Activation hidden_activation = Activation::kRelu;
  Pooling pooling;
};

MilNet make_milnet(Eigen::Index input_dim, const MilNetSpec& spec, std::uint64_t seed);

struct MilForward {
  double score = 0.0;           // pooled, in training units
  Eigen::VectorXd intensities;  // one per instance, training units
};

MilForward forward_mil(const MilNet& net, const weakdata::Bag& bag);
// Gradient of mil_loss(score, target) w.r.t. every parameter.
MilNetGrad backward(const MilNet& net, const weakdata::Bag& bag, double target,
                    double* loss = nullptr);

// LSTM over the segments, flatten, sigmoid dense head with M outputs, average.
struct SeqNet {
  LstmLayer lstm;
  std::vector<DenseLayer> head;
  Eigen::Index M = 0;
  bool label_scaling = true;

  Eigen::Index input_dim() const { return lstm.input_dim(); }
};

struct SeqNetGrad {
  LstmGrad lstm;
  std::vector<DenseGrad> head;
};

struct SeqNetSpec {
  int lstm_hidden = 32;
  std::vector<int> head_hidden = {64, 32};  // final stage has M units
};

SeqNet make_seqnet(Eigen::Index input_dim, Eigen::Index M, const SeqNetSpec& spec,
                   std::uint64_t seed);

struct SeqForward {
  double score = 0.0;              // training units, in (0, 1) for sigmoid heads
  Eigen::MatrixXd activations;     // M x H per-segment hidden states
};

SeqForward forward_seq(const SeqNet& net, const weakdata::Bag& bag);
SeqNetGrad backward(const SeqNet& net, const weakdata::Bag& bag, double target,
                    double* loss = nullptr);

// Head output for a flattened M*H activation vector, averaged.
double seq_head_score(const SeqNet& net, const Eigen::VectorXd& flat);

// Parameter and gradient blocks in matching order.
std::vector<std::span<double>> parameter_blocks(MilNet& net);
std::vector<std::span<double>> parameter_blocks(MilNetGrad& grad);
std::vector<std::span<double>> parameter_blocks(SeqNet& net);
std::vector<std::span<double>> parameter_blocks(SeqNetGrad& grad);

MilNetGrad zero_grad(const MilNet& net);
SeqNetGrad zero_grad(const SeqNet& net);

// Bag score in label units (x3 when label scaling is on).
double predict(const MilNet& net, const weakdata::Bag& bag);
double predict(const SeqNet& net, const weakdata::Bag& bag);

// Per-instance intensities in label units. MilNet: the ranking-stage outputs.
// SeqNet: the head evaluated on the flattened activations with every other
// segment's block zeroed, one segment at a time.
Eigen::VectorXd localize(const MilNet& net, const weakdata::Bag& bag);
Eigen::VectorXd localize(const SeqNet& net, const weakdata::Bag& bag);

}  // namespace engage::deepmil
