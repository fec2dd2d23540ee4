#include "engage_mil/deepmil/nets.hpp"
#include "engage_mil/error.hpp"

namespace engage::deepmil {
namespace {

double pool(const Pooling& pooling, const Eigen::VectorXd& r) {
  const std::span<const double> view(r.data(), static_cast<std::size_t>(r.size()));
  return pooling.kind == PoolingKind::kTopK ? topk_pool(view, pooling.k) : mean_pool(view);
}

void check_input(const MilNet& net, const weakdata::Bag& bag) {
  require(!net.layers.empty() && net.layers.back().out() == 1, ErrorCode::kInvalidArgument,
          "MIL network must end in a single ranking unit");
  require(bag.dim() == net.input_dim(), ErrorCode::kDimensionMismatch,
          "bag dimension " + std::to_string(bag.dim()) + " vs network input " +
              std::to_string(net.input_dim()));
  require(bag.size() >= 1, ErrorCode::kInvalidInput, "empty bag");
}

}  // namespace

MilNet make_milnet(Eigen::Index input_dim, const MilNetSpec& spec, std::uint64_t seed) {
  require(input_dim >= 1, ErrorCode::kInvalidArgument, "input dimension must be positive");
  Rng rng(seed);
  MilNet net;
  net.pooling = spec.pooling;
  Eigen::Index in = input_dim;
  for (int width : spec.hidden) {
    require(width >= 1, ErrorCode::kInvalidArgument, "layer widths must be positive");
    net.layers.push_back(make_dense(in, width, spec.hidden_activation, rng));
    in = width;
  }
  net.layers.push_back(make_dense(in, 1, Activation::kLinear, rng));
  return net;
}

MilForward forward_mil(const MilNet& net, const weakdata::Bag& bag) {
  check_input(net, bag);
  Eigen::MatrixXd a = bag.instances.transpose();
  for (const DenseLayer& layer : net.layers) a = dense_forward(layer, a);
  MilForward out;
  out.intensities = a.row(0).transpose();
  out.score = pool(net.pooling, out.intensities);
  return out;
}

MilNetGrad zero_grad(const MilNet& net) {
  MilNetGrad g;
  for (const DenseLayer& layer : net.layers) g.layers.push_back(zero_grad(layer));
  return g;
}

MilNetGrad backward(const MilNet& net, const weakdata::Bag& bag, double target, double* loss) {
  check_input(net, bag);
  std::vector<DenseCache> caches(net.layers.size());
  Eigen::MatrixXd a = bag.instances.transpose();
  for (std::size_t l = 0; l < net.layers.size(); ++l) a = dense_forward(net.layers[l], a, &caches[l]);
  const Eigen::VectorXd r = a.row(0).transpose();
  const double score = pool(net.pooling, r);
  if (loss != nullptr) *loss = mil_loss(score, target);

  const double d_score = 2.0 * (score - target);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(1, r.size());
  if (net.pooling.kind == PoolingKind::kTopK) {
    const std::span<const double> view(r.data(), static_cast<std::size_t>(r.size()));
    for (Eigen::Index j : topk_indices(view, net.pooling.k)) d(0, j) = d_score / net.pooling.k;
  } else {
    d.setConstant(d_score / static_cast<double>(r.size()));
  }

  MilNetGrad grad = zero_grad(net);
  for (std::size_t l = net.layers.size(); l-- > 0;)
    d = dense_backward(net.layers[l], caches[l], d, grad.layers[l]);
  return grad;
}

std::vector<std::span<double>> parameter_blocks(MilNet& net) {
  std::vector<std::span<double>> blocks;
  for (DenseLayer& layer : net.layers) {
    blocks.push_back(as_span(layer.weights));
    blocks.push_back(as_span(layer.bias));
  }
  return blocks;
}

std::vector<std::span<double>> parameter_blocks(MilNetGrad& grad) {
  std::vector<std::span<double>> blocks;
  for (DenseGrad& layer : grad.layers) {
    blocks.push_back(as_span(layer.weights));
    blocks.push_back(as_span(layer.bias));
  }
  return blocks;
}

double predict(const MilNet& net, const weakdata::Bag& bag) {
  return forward_mil(net, bag).score * (net.label_scaling ? kLabelRange : 1.0);
}

Eigen::VectorXd localize(const MilNet& net, const weakdata::Bag& bag) {
  return forward_mil(net, bag).intensities * (net.label_scaling ? kLabelRange : 1.0);
}

}  // namespace engage::deepmil
