#include "engage_mil/deepmil/nets.hpp"
#include "engage_mil/error.hpp"

namespace engage::deepmil {
namespace {

void check_input(const SeqNet& net, const weakdata::Bag& bag) {
  require(bag.dim() == net.input_dim(), ErrorCode::kDimensionMismatch,
          "bag dimension " + std::to_string(bag.dim()) + " vs LSTM input " +
              std::to_string(net.input_dim()));
  require(bag.size() == net.M, ErrorCode::kDimensionMismatch,
          "bag has " + std::to_string(bag.size()) + " segments, network expects " +
              std::to_string(net.M));
}

Eigen::VectorXd flatten(const Eigen::MatrixXd& hidden) {
  // Column t of `hidden` is h_t; segment-major order.
  return Eigen::Map<const Eigen::VectorXd>(hidden.data(), hidden.size());
}

}  // namespace

SeqNet make_seqnet(Eigen::Index input_dim, Eigen::Index M, const SeqNetSpec& spec,
                   std::uint64_t seed) {
  require(input_dim >= 1 && M >= 1 && spec.lstm_hidden >= 1, ErrorCode::kInvalidArgument,
          "sequence network sizes must be positive");
  Rng rng(seed);
  SeqNet net;
  net.M = M;
  net.lstm = make_lstm(input_dim, spec.lstm_hidden, rng);
  Eigen::Index in = M * spec.lstm_hidden;
  for (int width : spec.head_hidden) {
    require(width >= 1, ErrorCode::kInvalidArgument, "layer widths must be positive");
    net.head.push_back(make_dense(in, width, Activation::kSigmoid, rng));
    in = width;
  }
  net.head.push_back(make_dense(in, M, Activation::kSigmoid, rng));
  return net;
}

double seq_head_score(const SeqNet& net, const Eigen::VectorXd& flat) {
  Eigen::MatrixXd a = flat;
  for (const DenseLayer& layer : net.head) a = dense_forward(layer, a);
  return a.mean();
}

SeqForward forward_seq(const SeqNet& net, const weakdata::Bag& bag) {
  check_input(net, bag);
  SeqForward out;
  const Eigen::MatrixXd hidden = lstm_forward(net.lstm, bag.instances.transpose());
  out.score = seq_head_score(net, flatten(hidden));
  out.activations = hidden.transpose();
  return out;
}

SeqNetGrad zero_grad(const SeqNet& net) {
  SeqNetGrad g;
  g.lstm = zero_grad(net.lstm);
  for (const DenseLayer& layer : net.head) g.head.push_back(zero_grad(layer));
  return g;
}

SeqNetGrad backward(const SeqNet& net, const weakdata::Bag& bag, double target, double* loss) {
  check_input(net, bag);
  LstmCache lstm_cache;
  const Eigen::MatrixXd hidden = lstm_forward(net.lstm, bag.instances.transpose(), &lstm_cache);
  std::vector<DenseCache> caches(net.head.size());
  Eigen::MatrixXd a = flatten(hidden);
  for (std::size_t l = 0; l < net.head.size(); ++l) a = dense_forward(net.head[l], a, &caches[l]);
  const double score = a.mean();
  if (loss != nullptr) *loss = mil_loss(score, target);

  SeqNetGrad grad = zero_grad(net);
  Eigen::MatrixXd d =
      Eigen::MatrixXd::Constant(a.rows(), 1, 2.0 * (score - target) / static_cast<double>(a.rows()));
  for (std::size_t l = net.head.size(); l-- > 0;)
    d = dense_backward(net.head[l], caches[l], d, grad.head[l]);
  const Eigen::MatrixXd d_hidden =
      Eigen::Map<const Eigen::MatrixXd>(d.data(), hidden.rows(), hidden.cols());
  lstm_backward(net.lstm, lstm_cache, d_hidden, grad.lstm);
  return grad;
}

std::vector<std::span<double>> parameter_blocks(SeqNet& net) {
  std::vector<std::span<double>> blocks = {as_span(net.lstm.weights), as_span(net.lstm.bias)};
  for (DenseLayer& layer : net.head) {
    blocks.push_back(as_span(layer.weights));
    blocks.push_back(as_span(layer.bias));
  }
  return blocks;
}

std::vector<std::span<double>> parameter_blocks(SeqNetGrad& grad) {
  std::vector<std::span<double>> blocks = {as_span(grad.lstm.weights), as_span(grad.lstm.bias)};
  for (DenseGrad& layer : grad.head) {
    blocks.push_back(as_span(layer.weights));
    blocks.push_back(as_span(layer.bias));
  }
  return blocks;
}

double predict(const SeqNet& net, const weakdata::Bag& bag) {
  return forward_seq(net, bag).score * (net.label_scaling ? kLabelRange : 1.0);
}

Eigen::VectorXd localize(const SeqNet& net, const weakdata::Bag& bag) {
  check_input(net, bag);
  const Eigen::MatrixXd hidden = lstm_forward(net.lstm, bag.instances.transpose());
  const Eigen::Index h = hidden.rows();
  const double scale = net.label_scaling ? kLabelRange : 1.0;
  Eigen::VectorXd out(net.M);
  Eigen::VectorXd flat = Eigen::VectorXd::Zero(hidden.size());
  for (Eigen::Index j = 0; j < net.M; ++j) {
    flat.segment(j * h, h) = hidden.col(j);
    out[j] = seq_head_score(net, flat) * scale;
    flat.segment(j * h, h).setZero();
  }
  return out;
}

}  // namespace engage::deepmil
