#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "netslice/q_network.hpp"
#include "netslice/rng.hpp"

namespace netslice {

enum class OptimizerKind : std::uint8_t { kSgd, kAdam };

struct AgentConfig {
  double gamma = 0.9;
  double learning_rate = 1e-3;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  std::size_t epsilon_decay_steps = 2000;  // episodes of linear annealing
  std::size_t batch_size = 32;
  std::size_t clone_period = 100;  // episodes between target refreshes
  std::size_t replay_capacity = 10000;
  std::vector<std::size_t> hidden{64, 64};
  OptimizerKind optimizer = OptimizerKind::kSgd;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
};

void validate(const AgentConfig& cfg);

struct Experience {
  std::vector<double> state;
  std::size_t action = 0;
  std::vector<double> next_state;
  double reward = 0.0;
  bool terminal = false;
};

/// Bounded FIFO of experiences; the oldest entry is evicted first.
class ReplayMemory {
 public:
  explicit ReplayMemory(std::size_t capacity);

  void push(Experience e);
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return buffer_.size(); }

  /// i-th oldest experience currently stored.
  const Experience& at(std::size_t i) const;

  /// `batch_size` distinct entries drawn uniformly; nullopt while the memory
  /// holds fewer than `batch_size` experiences.
  std::optional<std::vector<const Experience*>> sample(std::size_t batch_size, Rng& rng) const;

 private:
  std::vector<Experience> buffer_;
  std::size_t head_ = 0;  // slot of the oldest entry
  std::size_t size_ = 0;
};

/// Greedy with probability 1 - epsilon (ties go to the lowest index),
/// uniform otherwise.
std::size_t select_action(std::span<const double> q_values, double epsilon, Rng& rng);
std::size_t argmax(std::span<const double> values);

/// reward when terminal, else reward + gamma * max_a' Q_target(next_state, a').
double td_target(double reward, std::span<const double> next_state, const QNetwork& target_net, double gamma,
                 bool terminal);

class Optimizer {
 public:
  explicit Optimizer(const AgentConfig& cfg) : cfg_(cfg) {}
  /// Descends the loss: plain SGD or bias-corrected Adam.
  void apply(QNetwork& net, const Gradients& grad);

 private:
  AgentConfig cfg_;
  Gradients m_;
  Gradients v_;
  std::size_t steps_ = 0;
};

/// One gradient step on the half-squared TD error of the taken actions.
/// Returns the loss before the update; throws TrainingDivergence when the
/// loss, gradient, or updated parameters are not finite.
double train_step(QNetwork& net, std::span<const Experience* const> batch, std::span<const double> targets,
                  Optimizer& optimizer);

/// Deep copy of the evaluation network.
QNetwork clone_target(const QNetwork& eval_net);

/// Evaluation/target network pair with replay and an annealed epsilon.
class DqnAgent {
 public:
  DqnAgent(std::size_t state_dim, std::size_t action_count, AgentConfig cfg, std::uint64_t seed);

  /// Epsilon-greedy choice under the current schedule value.
  std::size_t act(std::span<const double> state);
  std::size_t greedy(std::span<const double> state) const;

  void remember(Experience e);

  /// Closes the current episode: one minibatch update when the memory holds
  /// at least batch_size experiences, a target refresh every clone_period
  /// episodes, then advances the episode counter. Returns the loss when an
  /// update happened.
  std::optional<double> end_episode();

  double epsilon() const;
  std::size_t episodes() const { return episode_; }
  std::size_t updates() const { return updates_; }
  std::size_t clones() const { return clones_; }
  const QNetwork& eval_net() const { return eval_; }
  const QNetwork& target_net() const { return target_; }
  const ReplayMemory& memory() const { return memory_; }
  const AgentConfig& config() const { return cfg_; }

 private:
  AgentConfig cfg_;
  Rng rng_;
  QNetwork eval_;
  QNetwork target_;
  ReplayMemory memory_;
  Optimizer optimizer_;
  std::size_t episode_ = 0;
  std::size_t updates_ = 0;
  std::size_t clones_ = 0;
};

struct Transition {
  double reward = 0.0;
  bool terminal = false;
};

/// Continuing-task interface used by the training loop. After a terminal
/// transition observe() must return the state the next episode starts from.
class Environment {
 public:
  virtual ~Environment() = default;
  virtual std::size_t state_dim() const = 0;
  virtual std::size_t action_count() const = 0;
  virtual std::vector<double> observe() = 0;
  virtual Transition step(std::size_t action) = 0;
};

struct EpisodeRecord {
  std::size_t episode = 0;
  std::size_t action = 0;
  double reward = 0.0;
  double epsilon = 0.0;
  std::optional<double> loss;

  bool operator==(const EpisodeRecord&) const = default;
};

struct TrainingResult {
  QNetwork network;
  std::vector<EpisodeRecord> log;
};

/// Runs `episodes` decision steps of observe / act / store / update / clone.
TrainingResult run_training(Environment& env, DqnAgent& agent, std::size_t episodes);
TrainingResult run_training(Environment& env, const AgentConfig& cfg, std::size_t episodes, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Checkpoints: "NSQN", u32 version, u64 input/output dims, u64 layer count,
// then per layer u64 rows, u64 cols, u8 activation, row-major f64 weights,
// f64 biases; finally a u64-length-prefixed config echo. Little endian.

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  QNetwork network;
  std::string config_echo;
};

void save_checkpoint(std::ostream& os, const QNetwork& net, const std::string& config_echo);
Checkpoint load_checkpoint(std::istream& is);
void save_checkpoint(const std::string& path, const QNetwork& net, const std::string& config_echo);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace netslice
