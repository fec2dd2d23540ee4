#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "engage_mil/rng.hpp"

namespace engage::deepmil {

enum class Activation { kRelu, kSigmoid, kLinear };

std::string_view to_string(Activation a);
std::optional<Activation> parse_activation(std::string_view name);

// y = act(W x + b), applied column-wise: inputs are in x batch.
struct DenseLayer {
  Eigen::MatrixXd weights;  // out x in
  Eigen::VectorXd bias;     // out
  Activation activation = Activation::kLinear;

  Eigen::Index in() const { return weights.cols(); }
  Eigen::Index out() const { return weights.rows(); }
};

struct DenseGrad {
  Eigen::MatrixXd weights;
  Eigen::VectorXd bias;
};

// Forward intermediates kept for the backward pass.
struct DenseCache {
  Eigen::MatrixXd input;
  Eigen::MatrixXd pre;
  Eigen::MatrixXd output;
};

DenseLayer make_dense(Eigen::Index in, Eigen::Index out, Activation act, Rng& rng);
DenseGrad zero_grad(const DenseLayer& layer);

Eigen::MatrixXd dense_forward(const DenseLayer& layer, const Eigen::MatrixXd& x,
                              DenseCache* cache = nullptr);
// Accumulates parameter gradients into `grad`, returns d(loss)/d(input).
Eigen::MatrixXd dense_backward(const DenseLayer& layer, const DenseCache& cache,
                               const Eigen::MatrixXd& d_output, DenseGrad& grad);

// Standard LSTM cell. Gate rows in `weights` / `bias` are stacked as
// [input; forget; output; candidate], each H rows over the concatenated
// [x_t; h_{t-1}] input.
struct LstmLayer {
  Eigen::MatrixXd weights;  // 4H x (D + H)
  Eigen::VectorXd bias;     // 4H

  Eigen::Index hidden() const { return weights.rows() / 4; }
  Eigen::Index input_dim() const { return weights.cols() - hidden(); }
};

struct LstmGrad {
  Eigen::MatrixXd weights;
  Eigen::VectorXd bias;
};

struct LstmCache {
  Eigen::MatrixXd inputs;  // (D + H) x T, column t = [x_t; h_{t-1}]
  Eigen::MatrixXd gates;   // 4H x T, post-activation
  Eigen::MatrixXd cells;   // H x (T + 1), column 0 is the zero initial state
  Eigen::MatrixXd hidden;  // H x T
};

// Forget-gate bias starts at 1, other biases at 0.
LstmLayer make_lstm(Eigen::Index input_dim, Eigen::Index hidden, Rng& rng);
LstmGrad zero_grad(const LstmLayer& layer);

// x is D x T (one column per time step). Returns H x T hidden states.
Eigen::MatrixXd lstm_forward(const LstmLayer& layer, const Eigen::MatrixXd& x,
                             LstmCache* cache = nullptr);
// d_hidden is H x T (loss gradient w.r.t. every h_t); full backpropagation
// through time. Input gradients are not needed and not returned.
void lstm_backward(const LstmLayer& layer, const LstmCache& cache, const Eigen::MatrixXd& d_hidden,
                   LstmGrad& grad);

inline std::span<double> as_span(Eigen::MatrixXd& m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}
inline std::span<double> as_span(Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

}  // namespace engage::deepmil
