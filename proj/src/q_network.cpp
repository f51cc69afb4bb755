#include "netslice/q_network.hpp"

#include <cmath>
#include <string>

#include "netslice/errors.hpp"

namespace netslice {

namespace {

void activate(Eigen::MatrixXd& z, Activation act) {
  if (act == Activation::kRelu) z = z.cwiseMax(0.0);
}

}  // namespace

std::vector<double> Gradients::flatten() const {
  std::vector<double> flat;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    for (Eigen::Index r = 0; r < weights[l].rows(); ++r) {
      for (Eigen::Index c = 0; c < weights[l].cols(); ++c) flat.push_back(weights[l](r, c));
    }
    for (Eigen::Index r = 0; r < biases[l].size(); ++r) flat.push_back(biases[l](r));
  }
  return flat;
}

QNetwork::QNetwork(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw ContractViolation("QNetwork needs at least one layer");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    if (layer.bias.size() != layer.weights.rows()) {
      throw ContractViolation("layer " + std::to_string(l) + ": bias size does not match weight rows");
    }
    if (l > 0 && layer.weights.cols() != layers_[l - 1].weights.rows()) {
      throw ContractViolation("layer " + std::to_string(l) + ": input size does not chain");
    }
  }
  if (layers_.back().activation != Activation::kIdentity) {
    throw ContractViolation("QNetwork output layer must be linear");
  }
}

QNetwork QNetwork::make(std::size_t input_dim, std::span<const std::size_t> hidden, std::size_t output_dim,
                        Rng& rng) {
  if (input_dim == 0 || output_dim == 0) throw ContractViolation("QNetwork dimensions must be positive");
  std::vector<DenseLayer> layers;
  std::size_t fan_in = input_dim;
  auto add = [&](std::size_t fan_out, Activation act) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    DenseLayer layer;
    layer.weights.resize(static_cast<Eigen::Index>(fan_out), static_cast<Eigen::Index>(fan_in));
    layer.bias.resize(static_cast<Eigen::Index>(fan_out));
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) {
        layer.weights(r, c) = bound * (2.0 * uniform01(rng) - 1.0);
      }
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias(r) = bound * (2.0 * uniform01(rng) - 1.0);
    layer.activation = act;
    layers.push_back(std::move(layer));
    fan_in = fan_out;
  };
  for (std::size_t h : hidden) {
    if (h == 0) throw ContractViolation("hidden layer width must be positive");
    add(h, Activation::kRelu);
  }
  add(output_dim, Activation::kIdentity);
  return QNetwork(std::move(layers));
}

std::size_t QNetwork::input_dim() const {
  return layers_.empty() ? 0 : static_cast<std::size_t>(layers_.front().weights.cols());
}

std::size_t QNetwork::output_dim() const {
  return layers_.empty() ? 0 : static_cast<std::size_t>(layers_.back().weights.rows());
}

std::size_t QNetwork::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
  return n;
}

Eigen::VectorXd QNetwork::forward(std::span<const double> state) const {
  if (state.size() != input_dim()) {
    throw ContractViolation("forward: state has " + std::to_string(state.size()) + " entries, network expects " +
                            std::to_string(input_dim()));
  }
  Eigen::MatrixXd x = Eigen::Map<const Eigen::VectorXd>(state.data(), static_cast<Eigen::Index>(state.size()));
  return forward_batch(x).col(0);
}

Eigen::MatrixXd QNetwork::forward_batch(const Eigen::MatrixXd& states) const {
  if (static_cast<std::size_t>(states.rows()) != input_dim()) {
    throw ContractViolation("forward_batch: state dimension mismatch");
  }
  Eigen::MatrixXd x = states;
  for (const auto& layer : layers_) {
    Eigen::MatrixXd z = layer.weights * x;
    z.colwise() += layer.bias;
    activate(z, layer.activation);
    x = std::move(z);
  }
  return x;
}

std::vector<double> QNetwork::flatten() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (const auto& l : layers_) {
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weights.cols(); ++c) flat.push_back(l.weights(r, c));
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) flat.push_back(l.bias(r));
  }
  return flat;
}

void QNetwork::assign(std::span<const double> flat) {
  if (flat.size() != parameter_count()) throw ContractViolation("assign: parameter count mismatch");
  std::size_t i = 0;
  for (auto& l : layers_) {
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weights.cols(); ++c) l.weights(r, c) = flat[i++];
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias(r) = flat[i++];
  }
}

Gradients QNetwork::zero_gradients() const {
  Gradients g;
  for (const auto& l : layers_) {
    g.weights.push_back(Eigen::MatrixXd::Zero(l.weights.rows(), l.weights.cols()));
    g.biases.push_back(Eigen::VectorXd::Zero(l.bias.size()));
  }
  return g;
}

void QNetwork::apply_update(const Gradients& step, double scale) {
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    layers_[l].weights.noalias() += scale * step.weights[l];
    layers_[l].bias.noalias() += scale * step.biases[l];
  }
}

bool QNetwork::all_finite() const {
  for (const auto& l : layers_) {
    if (!l.weights.allFinite() || !l.bias.allFinite()) return false;
  }
  return true;
}

namespace {

void check_batch(const QNetwork& net, const Eigen::MatrixXd& states, std::span<const std::size_t> actions,
                 std::span<const double> targets) {
  const auto batch = static_cast<std::size_t>(states.cols());
  if (batch == 0) throw ContractViolation("empty training batch");
  if (actions.size() != batch || targets.size() != batch) {
    throw ContractViolation("batch, action, and target counts differ");
  }
  for (std::size_t a : actions) {
    if (a >= net.output_dim()) throw ContractViolation("action index out of range");
  }
}

}  // namespace

double batch_loss(const QNetwork& net, const Eigen::MatrixXd& states, std::span<const std::size_t> actions,
                  std::span<const double> targets) {
  check_batch(net, states, actions, targets);
  const Eigen::MatrixXd q = net.forward_batch(states);
  double loss = 0.0;
  for (std::size_t b = 0; b < actions.size(); ++b) {
    const double err = targets[b] - q(static_cast<Eigen::Index>(actions[b]), static_cast<Eigen::Index>(b));
    loss += 0.5 * err * err;
  }
  return loss / static_cast<double>(actions.size());
}

double loss_and_gradient(const QNetwork& net, const Eigen::MatrixXd& states, std::span<const std::size_t> actions,
                         std::span<const double> targets, Gradients& grad) {
  check_batch(net, states, actions, targets);
  const auto& layers = net.layers();
  const std::size_t depth = layers.size();
  const auto batch = static_cast<double>(states.cols());

  // Keep each layer's input for the backward pass.
  std::vector<Eigen::MatrixXd> inputs;
  inputs.reserve(depth + 1);
  inputs.push_back(states);
  for (const auto& layer : layers) {
    Eigen::MatrixXd z = layer.weights * inputs.back();
    z.colwise() += layer.bias;
    activate(z, layer.activation);
    inputs.push_back(std::move(z));
  }

  const Eigen::MatrixXd& q = inputs.back();
  Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(q.rows(), q.cols());
  double loss = 0.0;
  for (std::size_t b = 0; b < actions.size(); ++b) {
    const auto row = static_cast<Eigen::Index>(actions[b]);
    const auto col = static_cast<Eigen::Index>(b);
    const double err = targets[b] - q(row, col);
    loss += 0.5 * err * err;
    delta(row, col) = -err / batch;
  }
  loss /= batch;

  grad = net.zero_gradients();
  for (std::size_t l = depth; l-- > 0;) {
    if (layers[l].activation == Activation::kRelu) {
      delta = delta.cwiseProduct((inputs[l + 1].array() > 0.0).cast<double>().matrix());
    }
    grad.weights[l].noalias() = delta * inputs[l].transpose();
    grad.biases[l] = delta.rowwise().sum();
    if (l > 0) delta = layers[l].weights.transpose() * delta;
  }
  return loss;
}

}  // namespace netslice
