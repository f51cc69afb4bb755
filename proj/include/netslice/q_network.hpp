#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "netslice/rng.hpp"

namespace netslice {

enum class Activation : std::uint8_t { kRelu = 0, kIdentity = 1 };

struct DenseLayer {
  Eigen::MatrixXd weights;  // outputs x inputs
  Eigen::VectorXd bias;
  Activation activation = Activation::kRelu;
};

/// Same shapes as a QNetwork's parameters.
struct Gradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  /// Flattened in QNetwork::flatten order.
  std::vector<double> flatten() const;
};

/// Feed-forward Q-function: affine layers with ReLU on hidden layers and an
/// identity output head, one output per action.
class QNetwork {
 public:
  QNetwork() = default;
  /// Checks that consecutive layer dimensions chain and the last layer is
  /// linear; throws ContractViolation otherwise.
  explicit QNetwork(std::vector<DenseLayer> layers);

  /// Weights and biases drawn uniformly from +-1/sqrt(fan_in).
  static QNetwork make(std::size_t input_dim, std::span<const std::size_t> hidden, std::size_t output_dim,
                       Rng& rng);

  std::size_t input_dim() const;
  std::size_t output_dim() const;
  std::size_t parameter_count() const;
  const std::vector<DenseLayer>& layers() const { return layers_; }

  /// Q-values for one state; throws ContractViolation on a dimension mismatch.
  Eigen::VectorXd forward(std::span<const double> state) const;

  /// Column-wise forward pass over a batch of states (input_dim x batch).
  Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& states) const;

  std::vector<double> flatten() const;
  void assign(std::span<const double> flat);

  Gradients zero_gradients() const;
  void apply_update(const Gradients& step, double scale);

  bool all_finite() const;

 private:
  std::vector<DenseLayer> layers_;
};

/// Half mean squared TD error over the batch, counted only on the taken
/// actions, together with its gradient.
///   loss = (1/B) * sum_b 0.5 * (target_b - Q(s_b, a_b))^2
double loss_and_gradient(const QNetwork& net, const Eigen::MatrixXd& states, std::span<const std::size_t> actions,
                         std::span<const double> targets, Gradients& grad);

double batch_loss(const QNetwork& net, const Eigen::MatrixXd& states, std::span<const std::size_t> actions,
                  std::span<const double> targets);

}  // namespace netslice
