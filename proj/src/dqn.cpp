#include "netslice/dqn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "netslice/errors.hpp"

namespace netslice {

void validate(const AgentConfig& cfg) {
  if (!(cfg.gamma >= 0.0 && cfg.gamma <= 1.0)) throw ConfigError("gamma must lie in [0, 1]");
  if (!(cfg.learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(cfg.epsilon_start >= 0.0 && cfg.epsilon_start <= 1.0) || !(cfg.epsilon_end >= 0.0 && cfg.epsilon_end <= 1.0)) {
    throw ConfigError("epsilon values must lie in [0, 1]");
  }
  if (cfg.batch_size == 0) throw ConfigError("batch_size must be positive");
  if (cfg.replay_capacity < cfg.batch_size) throw ConfigError("batch_size cannot exceed replay capacity");
  if (cfg.clone_period == 0) throw ConfigError("clone_period must be positive");
  for (std::size_t h : cfg.hidden) {
    if (h == 0) throw ConfigError("hidden layer widths must be positive");
  }
}

// ---------------------------------------------------------------------------

ReplayMemory::ReplayMemory(std::size_t capacity) : buffer_(capacity) {
  if (capacity == 0) throw ConfigError("replay capacity must be positive");
}

void ReplayMemory::push(Experience e) {
  if (size_ < buffer_.size()) {
    buffer_[(head_ + size_) % buffer_.size()] = std::move(e);
    ++size_;
  } else {
    buffer_[head_] = std::move(e);
    head_ = (head_ + 1) % buffer_.size();
  }
}

const Experience& ReplayMemory::at(std::size_t i) const {
  if (i >= size_) throw ContractViolation("replay index out of range");
  return buffer_[(head_ + i) % buffer_.size()];
}

std::optional<std::vector<const Experience*>> ReplayMemory::sample(std::size_t batch_size, Rng& rng) const {
  if (batch_size == 0 || size_ < batch_size) return std::nullopt;
  std::vector<std::size_t> picked;
  picked.reserve(batch_size);
  if (batch_size * 4 <= size_) {
    // Sparse draw: rejection against the few indices already taken.
    while (picked.size() < batch_size) {
      const auto i = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(size_));
      if (std::find(picked.begin(), picked.end(), i) == picked.end()) picked.push_back(i);
    }
  } else {
    std::vector<std::size_t> idx(size_);
    for (std::size_t i = 0; i < size_; ++i) idx[i] = i;
    for (std::size_t k = 0; k < batch_size; ++k) {
      const std::size_t j = k + static_cast<std::size_t>(uniform01(rng) * static_cast<double>(size_ - k));
      std::swap(idx[k], idx[j]);
      picked.push_back(idx[k]);
    }
  }
  std::vector<const Experience*> out;
  out.reserve(batch_size);
  for (std::size_t i : picked) out.push_back(&at(i));
  return out;
}

// ---------------------------------------------------------------------------

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) throw ContractViolation("argmax of an empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

std::size_t select_action(std::span<const double> q_values, double epsilon, Rng& rng) {
  if (q_values.empty()) throw ContractViolation("select_action: no actions");
  if (uniform01(rng) < epsilon) {
    const auto n = static_cast<double>(q_values.size());
    return std::min(q_values.size() - 1, static_cast<std::size_t>(uniform01(rng) * n));
  }
  return argmax(q_values);
}

double td_target(double reward, std::span<const double> next_state, const QNetwork& target_net, double gamma,
                 bool terminal) {
  if (terminal) return reward;
  const Eigen::VectorXd q = target_net.forward(next_state);
  return reward + gamma * q.maxCoeff();
}

void Optimizer::apply(QNetwork& net, const Gradients& grad) {
  if (cfg_.optimizer == OptimizerKind::kSgd) {
    net.apply_update(grad, -cfg_.learning_rate);
    return;
  }
  if (m_.weights.empty()) {
    m_ = net.zero_gradients();
    v_ = net.zero_gradients();
  }
  ++steps_;
  const double b1 = cfg_.adam_beta1;
  const double b2 = cfg_.adam_beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  Gradients step = net.zero_gradients();
  auto update = [&](auto& m, auto& v, const auto& g, auto& out) {
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
    out = ((m / c1).array() / ((v / c2).array().sqrt() + cfg_.adam_epsilon)).matrix();
  };
  for (std::size_t l = 0; l < grad.weights.size(); ++l) {
    update(m_.weights[l], v_.weights[l], grad.weights[l], step.weights[l]);
    update(m_.biases[l], v_.biases[l], grad.biases[l], step.biases[l]);
  }
  net.apply_update(step, -cfg_.learning_rate);
}

double train_step(QNetwork& net, std::span<const Experience* const> batch, std::span<const double> targets,
                  Optimizer& optimizer) {
  if (batch.empty()) throw ContractViolation("train_step: empty batch");
  if (targets.size() != batch.size()) throw ContractViolation("train_step: one target per experience required");
  const auto dim = static_cast<Eigen::Index>(net.input_dim());
  Eigen::MatrixXd states(dim, static_cast<Eigen::Index>(batch.size()));
  std::vector<std::size_t> actions(batch.size());
  for (std::size_t b = 0; b < batch.size(); ++b) {
    if (static_cast<Eigen::Index>(batch[b]->state.size()) != dim) {
      throw ContractViolation("train_step: state dimension mismatch");
    }
    states.col(static_cast<Eigen::Index>(b)) =
        Eigen::Map<const Eigen::VectorXd>(batch[b]->state.data(), dim);
    actions[b] = batch[b]->action;
  }
  Gradients grad;
  const double loss = loss_and_gradient(net, states, actions, targets, grad);
  if (!std::isfinite(loss)) throw TrainingDivergence("non-finite TD loss");
  for (std::size_t l = 0; l < grad.weights.size(); ++l) {
    if (!grad.weights[l].allFinite() || !grad.biases[l].allFinite()) {
      throw TrainingDivergence("non-finite gradient");
    }
  }
  optimizer.apply(net, grad);
  if (!net.all_finite()) throw TrainingDivergence("non-finite parameters after update");
  return loss;
}

QNetwork clone_target(const QNetwork& eval_net) { return QNetwork(eval_net); }

// ---------------------------------------------------------------------------

DqnAgent::DqnAgent(std::size_t state_dim, std::size_t action_count, AgentConfig cfg, std::uint64_t seed)
    : cfg_(std::move(cfg)),
      rng_(make_stream(seed, {0x6167656e74ULL})),
      memory_((validate(cfg_), cfg_.replay_capacity)),
      optimizer_(cfg_) {
  Rng init = make_stream(seed, {0x696e6974ULL});
  eval_ = QNetwork::make(state_dim, cfg_.hidden, action_count, init);
  target_ = clone_target(eval_);
}

double DqnAgent::epsilon() const {
  if (cfg_.epsilon_decay_steps == 0 || episode_ >= cfg_.epsilon_decay_steps) return cfg_.epsilon_end;
  const double frac = static_cast<double>(episode_) / static_cast<double>(cfg_.epsilon_decay_steps);
  return cfg_.epsilon_start + frac * (cfg_.epsilon_end - cfg_.epsilon_start);
}

std::size_t DqnAgent::act(std::span<const double> state) {
  const Eigen::VectorXd q = eval_.forward(state);
  return select_action(std::span<const double>(q.data(), static_cast<std::size_t>(q.size())), epsilon(), rng_);
}

std::size_t DqnAgent::greedy(std::span<const double> state) const {
  const Eigen::VectorXd q = eval_.forward(state);
  return argmax(std::span<const double>(q.data(), static_cast<std::size_t>(q.size())));
}

void DqnAgent::remember(Experience e) {
  if (e.action >= eval_.output_dim()) throw ContractViolation("experience action out of range");
  memory_.push(std::move(e));
}

std::optional<double> DqnAgent::end_episode() {
  std::optional<double> loss;
  if (auto batch = memory_.sample(cfg_.batch_size, rng_)) {
    std::vector<double> targets;
    targets.reserve(batch->size());
    for (const Experience* e : *batch) {
      targets.push_back(td_target(e->reward, e->next_state, target_, cfg_.gamma, e->terminal));
    }
    loss = train_step(eval_, *batch, targets, optimizer_);
    ++updates_;
  }
  ++episode_;
  if (episode_ % cfg_.clone_period == 0) {
    target_ = clone_target(eval_);
    ++clones_;
  }
  return loss;
}

TrainingResult run_training(Environment& env, DqnAgent& agent, std::size_t episodes) {
  TrainingResult result;
  result.log.reserve(episodes);
  for (std::size_t t = 0; t < episodes; ++t) {
    std::vector<double> state = env.observe();
    const double eps = agent.epsilon();
    const std::size_t action = agent.act(state);
    const Transition tr = env.step(action);
    std::vector<double> next = env.observe();
    agent.remember(Experience{std::move(state), action, std::move(next), tr.reward, tr.terminal});
    const auto loss = agent.end_episode();
    result.log.push_back(EpisodeRecord{agent.episodes() - 1, action, tr.reward, eps, loss});
  }
  result.network = agent.eval_net();
  return result;
}

TrainingResult run_training(Environment& env, const AgentConfig& cfg, std::size_t episodes, std::uint64_t seed) {
  DqnAgent agent(env.state_dim(), env.action_count(), cfg, seed);
  return run_training(env, agent, episodes);
}

// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'N', 'S', 'Q', 'N'};

void put_u64(std::ostream& os, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffU);
  os.write(b, 8);
}

void put_f64(std::ostream& os, double x) {
  std::uint64_t v;
  std::memcpy(&v, &x, sizeof v);
  put_u64(os, v);
}

std::uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) throw ConfigError("checkpoint truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& is) {
  const std::uint64_t v = get_u64(is);
  double x;
  std::memcpy(&x, &v, sizeof x);
  return x;
}

}  // namespace

void save_checkpoint(std::ostream& os, const QNetwork& net, const std::string& config_echo) {
  os.write(kMagic, 4);
  const std::uint32_t version = kCheckpointVersion;
  for (int i = 0; i < 4; ++i) os.put(static_cast<char>((version >> (8 * i)) & 0xffU));
  put_u64(os, net.input_dim());
  put_u64(os, net.output_dim());
  put_u64(os, net.layers().size());
  for (const auto& l : net.layers()) {
    put_u64(os, static_cast<std::uint64_t>(l.weights.rows()));
    put_u64(os, static_cast<std::uint64_t>(l.weights.cols()));
    os.put(static_cast<char>(l.activation));
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weights.cols(); ++c) put_f64(os, l.weights(r, c));
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) put_f64(os, l.bias(r));
  }
  put_u64(os, config_echo.size());
  os.write(config_echo.data(), static_cast<std::streamsize>(config_echo.size()));
  if (!os) throw ConfigError("failed to write checkpoint");
}

Checkpoint load_checkpoint(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) throw ConfigError("not a Q-network checkpoint");
  unsigned char vb[4];
  if (!is.read(reinterpret_cast<char*>(vb), 4)) throw ConfigError("checkpoint truncated");
  const std::uint32_t version = vb[0] | (vb[1] << 8) | (vb[2] << 16) | (static_cast<std::uint32_t>(vb[3]) << 24);
  if (version != kCheckpointVersion) throw ConfigError("unsupported checkpoint version " + std::to_string(version));
  const std::uint64_t input_dim = get_u64(is);
  const std::uint64_t output_dim = get_u64(is);
  const std::uint64_t count = get_u64(is);
  if (count == 0 || count > 1024) throw ConfigError("checkpoint layer count out of range");
  std::vector<DenseLayer> layers;
  for (std::uint64_t l = 0; l < count; ++l) {
    const std::uint64_t rows = get_u64(is);
    const std::uint64_t cols = get_u64(is);
    if (rows == 0 || cols == 0 || rows > (1U << 20) || cols > (1U << 20)) {
      throw ConfigError("checkpoint layer shape out of range");
    }
    const int act = is.get();
    if (act != 0 && act != 1) throw ConfigError("checkpoint activation tag invalid");
    DenseLayer layer;
    layer.activation = static_cast<Activation>(act);
    layer.weights.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    layer.bias.resize(static_cast<Eigen::Index>(rows));
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) layer.weights(r, c) = get_f64(is);
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias(r) = get_f64(is);
    layers.push_back(std::move(layer));
  }
  Checkpoint cp;
  try {
    cp.network = QNetwork(std::move(layers));
  } catch (const ContractViolation& e) {
    throw ConfigError(std::string("checkpoint network invalid: ") + e.what());
  }
  if (cp.network.input_dim() != input_dim || cp.network.output_dim() != output_dim) {
    throw ConfigError("checkpoint header dimensions disagree with layers");
  }
  const std::uint64_t len = get_u64(is);
  if (len > (1U << 24)) throw ConfigError("checkpoint config echo too large");
  cp.config_echo.resize(len);
  if (len > 0 && !is.read(cp.config_echo.data(), static_cast<std::streamsize>(len))) {
    throw ConfigError("checkpoint truncated");
  }
  return cp;
}

void save_checkpoint(const std::string& path, const QNetwork& net, const std::string& config_echo) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open " + path + " for writing");
  save_checkpoint(os, net, config_echo);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open " + path);
  return load_checkpoint(is);
}

}  // namespace netslice
