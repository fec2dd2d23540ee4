#include "engage_mil/deepmil/layers.hpp"

#include <cmath>

namespace engage::deepmil {
namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

Eigen::MatrixXd activate(Activation act, const Eigen::MatrixXd& z) {
  switch (act) {
    case Activation::kRelu: return z.cwiseMax(0.0);
    case Activation::kSigmoid: return z.unaryExpr([](double v) { return sigmoid(v); });
    case Activation::kLinear: return z;
  }
  return z;
}

void fill_uniform(Eigen::MatrixXd& m, double scale, Rng& rng) {
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-scale, scale);
}

}  // namespace

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::kRelu: return "relu";
    case Activation::kSigmoid: return "sigmoid";
    case Activation::kLinear: return "linear";
  }
  return "unknown";
}

std::optional<Activation> parse_activation(std::string_view name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "sigmoid") return Activation::kSigmoid;
  if (name == "linear") return Activation::kLinear;
  return std::nullopt;
}

DenseLayer make_dense(Eigen::Index in, Eigen::Index out, Activation act, Rng& rng) {
  DenseLayer layer;
  layer.activation = act;
  layer.weights.resize(out, in);
  // Uniform, scaled by fan-in (He for ReLU, LeCun otherwise).
  const double gain = act == Activation::kRelu ? 6.0 : 3.0;
  fill_uniform(layer.weights, std::sqrt(gain / static_cast<double>(in)), rng);
  layer.bias = Eigen::VectorXd::Zero(out);
  return layer;
}

DenseGrad zero_grad(const DenseLayer& layer) {
  return {Eigen::MatrixXd::Zero(layer.out(), layer.in()), Eigen::VectorXd::Zero(layer.out())};
}

Eigen::MatrixXd dense_forward(const DenseLayer& layer, const Eigen::MatrixXd& x,
                              DenseCache* cache) {
  Eigen::MatrixXd pre = layer.weights * x;
  pre.colwise() += layer.bias;
  Eigen::MatrixXd out = activate(layer.activation, pre);
  if (cache != nullptr) {
    cache->input = x;
    cache->pre = std::move(pre);
    cache->output = out;
  }
  return out;
}

Eigen::MatrixXd dense_backward(const DenseLayer& layer, const DenseCache& cache,
                               const Eigen::MatrixXd& d_output, DenseGrad& grad) {
  Eigen::MatrixXd d_pre;
  switch (layer.activation) {
    case Activation::kRelu:
      d_pre = d_output.cwiseProduct((cache.pre.array() > 0.0).cast<double>().matrix());
      break;
    case Activation::kSigmoid:
      d_pre = d_output.cwiseProduct(
          (cache.output.array() * (1.0 - cache.output.array())).matrix());
      break;
    case Activation::kLinear:
      d_pre = d_output;
      break;
  }
  grad.weights.noalias() += d_pre * cache.input.transpose();
  grad.bias += d_pre.rowwise().sum();
  return layer.weights.transpose() * d_pre;
}

LstmLayer make_lstm(Eigen::Index input_dim, Eigen::Index hidden, Rng& rng) {
  LstmLayer layer;
  layer.weights.resize(4 * hidden, input_dim + hidden);
  fill_uniform(layer.weights, std::sqrt(3.0 / static_cast<double>(input_dim + hidden)), rng);
  layer.bias = Eigen::VectorXd::Zero(4 * hidden);
  layer.bias.segment(hidden, hidden).setOnes();
  return layer;
}

LstmGrad zero_grad(const LstmLayer& layer) {
  return {Eigen::MatrixXd::Zero(layer.weights.rows(), layer.weights.cols()),
          Eigen::VectorXd::Zero(layer.bias.size())};
}

Eigen::MatrixXd lstm_forward(const LstmLayer& layer, const Eigen::MatrixXd& x,
                             LstmCache* cache) {
  const Eigen::Index h = layer.hidden();
  const Eigen::Index d = layer.input_dim();
  const Eigen::Index steps = x.cols();
  LstmCache local;
  LstmCache& c = cache != nullptr ? *cache : local;
  c.inputs.resize(d + h, steps);
  c.gates.resize(4 * h, steps);
  c.cells = Eigen::MatrixXd::Zero(h, steps + 1);
  c.hidden.resize(h, steps);

  Eigen::VectorXd h_prev = Eigen::VectorXd::Zero(h);
  for (Eigen::Index t = 0; t < steps; ++t) {
    c.inputs.col(t).head(d) = x.col(t);
    c.inputs.col(t).tail(h) = h_prev;
    Eigen::VectorXd z = layer.weights * c.inputs.col(t) + layer.bias;
    for (Eigen::Index r = 0; r < 3 * h; ++r) z[r] = sigmoid(z[r]);
    for (Eigen::Index r = 3 * h; r < 4 * h; ++r) z[r] = std::tanh(z[r]);
    c.gates.col(t) = z;
    const auto in_gate = z.segment(0, h).array();
    const auto forget = z.segment(h, h).array();
    const auto out_gate = z.segment(2 * h, h).array();
    const auto cand = z.segment(3 * h, h).array();
    c.cells.col(t + 1) = (forget * c.cells.col(t).array() + in_gate * cand).matrix();
    h_prev = (out_gate * c.cells.col(t + 1).array().tanh()).matrix();
    c.hidden.col(t) = h_prev;
  }
  return c.hidden;
}

void lstm_backward(const LstmLayer& layer, const LstmCache& cache, const Eigen::MatrixXd& d_hidden,
                   LstmGrad& grad) {
  const Eigen::Index h = layer.hidden();
  const Eigen::Index steps = d_hidden.cols();
  Eigen::VectorXd dh_next = Eigen::VectorXd::Zero(h);
  Eigen::VectorXd dc_next = Eigen::VectorXd::Zero(h);
  Eigen::VectorXd dz(4 * h);
  for (Eigen::Index t = steps - 1; t >= 0; --t) {
    const auto gates = cache.gates.col(t);
    const Eigen::ArrayXd in_gate = gates.segment(0, h).array();
    const Eigen::ArrayXd forget = gates.segment(h, h).array();
    const Eigen::ArrayXd out_gate = gates.segment(2 * h, h).array();
    const Eigen::ArrayXd cand = gates.segment(3 * h, h).array();
    const Eigen::ArrayXd c_prev = cache.cells.col(t).array();
    const Eigen::ArrayXd tanh_c = cache.cells.col(t + 1).array().tanh();

    const Eigen::ArrayXd dh = d_hidden.col(t).array() + dh_next.array();
    const Eigen::ArrayXd dc = dh * out_gate * (1.0 - tanh_c.square()) + dc_next.array();
    dz.segment(0, h) = (dc * cand * in_gate * (1.0 - in_gate)).matrix();
    dz.segment(h, h) = (dc * c_prev * forget * (1.0 - forget)).matrix();
    dz.segment(2 * h, h) = (dh * tanh_c * out_gate * (1.0 - out_gate)).matrix();
    dz.segment(3 * h, h) = (dc * in_gate * (1.0 - cand.square())).matrix();

    grad.weights.noalias() += dz * cache.inputs.col(t).transpose();
    grad.bias += dz;
    dh_next = layer.weights.rightCols(h).transpose() * dz;
    dc_next = (dc * forget).matrix();
  }
}

}  // namespace engage::deepmil
