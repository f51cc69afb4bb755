#include "netslice/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <variant>

#include "netslice/baselines.hpp"
#include "netslice/errors.hpp"
#include "netslice/format.hpp"

namespace netslice {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kPlacementLabel = 0x706c616365;
constexpr std::uint64_t kTrainTraceLabel = 0x747261696e;
constexpr std::uint64_t kEvalTraceLabel = 0x6576616c;
constexpr std::uint64_t kTrainFadingLabel = 0x7466616465;
constexpr std::uint64_t kEvalFadingLabel = 0x6566616465;
constexpr std::uint64_t kAgentLabel = 0x6167656e74;

std::ofstream open_output(const std::string& dir, const std::string& name) {
  std::ofstream os(fs::path(dir) / name, std::ios::binary);
  if (!os) throw ConfigError("cannot write " + (fs::path(dir) / name).string());
  return os;
}

double median_of(std::vector<double> v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

}  // namespace

// ---------------------------------------------------------------------------

RewardNormalizer::RewardNormalizer(RewardNormalization cfg) : cfg_(cfg) {
  if (cfg_.calibration == 0 || !(cfg_.clip > 0.0)) throw ConfigError("invalid reward normalization");
}

bool RewardNormalizer::observe(double raw) {
  if (calibrated_) return false;
  samples_.push_back(raw);
  if (samples_.size() < cfg_.calibration) return false;
  offset_ = median_of(samples_);
  std::vector<double> dev(samples_.size());
  for (std::size_t i = 0; i < samples_.size(); ++i) dev[i] = std::abs(samples_[i] - offset_);
  scale_ = 1.4826 * median_of(dev);
  if (!(scale_ > 0.0)) {
    double spread = 0.0;
    for (double d : dev) spread = std::max(spread, d);
    scale_ = spread > 0.0 ? spread : std::max(std::abs(offset_), 1.0);
  }
  calibrated_ = true;
  samples_.clear();
  samples_.shrink_to_fit();
  return true;
}

double RewardNormalizer::operator()(double raw) const {
  if (!calibrated_) throw ContractViolation("reward normalizer used before calibration");
  return std::clamp((raw - offset_) / scale_, -cfg_.clip, cfg_.clip);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t label) {
  Rng rng = make_stream(seed, {label});
  return rng();
}

std::array<double, kSliceCount> expected_arrivals(const std::vector<SliceConfig>& slices, double epoch_duration) {
  std::array<double, kSliceCount> out{};
  for (const auto& s : slices) {
    const double mean_gap = std::visit(
        [](const auto& m) -> double {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, UniformGap>) return 0.5 * (m.min + m.max);
          if constexpr (std::is_same_v<T, TruncatedParetoGap>) return m.mean;
          if constexpr (std::is_same_v<T, ExponentialGap>) return m.mean;
          if constexpr (std::is_same_v<T, LognormalGap>) return std::exp(m.mu + 0.5 * m.sigma * m.sigma);
        },
        s.inter_arrival);
    out[static_cast<std::size_t>(s.slice_id)] += static_cast<double>(s.user_count) * epoch_duration / mean_gap;
  }
  return out;
}

std::vector<double> encode_radio_state(const RadioState& state, const std::array<double, kSliceCount>& expected) {
  std::vector<double> x(kSliceCount);
  for (std::size_t s = 0; s < kSliceCount; ++s) {
    x[s] = expected[s] > 0.0 ? static_cast<double>(state.arrived_packets[s]) / expected[s] : 0.0;
  }
  return x;
}

std::vector<SliceConfig> experiment_slices(const RadioExperiment& r) {
  return default_slices(r.volte_users, r.video_users, r.urllc_users);
}

std::vector<std::pair<std::string, double>> RunResult::metrics() const {
  std::vector<std::pair<std::string, double>> m;
  if (radio) {
    m = {{"se", radio->se},
         {"qoe_volte", radio->qoe[0]},
         {"qoe_video", radio->qoe[1]},
         {"qoe_urllc", radio->qoe[2]},
         {"qoe_aggregate", radio->qoe_aggregate},
         {"mean_reward", radio->mean_reward},
         {"share_volte", radio->bandwidth_share[0]},
         {"share_video", radio->bandwidth_share[1]},
         {"share_urllc", radio->bandwidth_share[2]}};
  }
  if (sfc) {
    m = {{"flows", static_cast<double>(sfc->flows)},
         {"mean_sojourn_a", sfc->mean_sojourn[0]},
         {"mean_sojourn_b", sfc->mean_sojourn[1]},
         {"mean_sojourn_c", sfc->mean_sojourn[2]},
         {"weighted_sojourn_a", sfc->weighted_sojourn_a},
         {"weighted_sojourn", sfc->weighted_sojourn},
         {"mean_waiting", sfc->mean_waiting},
         {"cpu_utilization", sfc->cpu_utilization},
         {"share_sfc_i", sfc->sfc_share[0]},
         {"share_sfc_ii", sfc->sfc_share[1]},
         {"share_sfc_iii", sfc->sfc_share[2]}};
  }
  return m;
}

namespace {

void write_summary_header(std::ostream& os, const RunResult& r) {
  os << "scheme,seed,trace_checksum";
  for (const auto& [name, value] : r.metrics()) os << ',' << name;
  os << '\n';
}

void write_summary_row(std::ostream& os, const RunResult& r) {
  os << to_string(r.config.scheme) << ',' << r.config.seed << ',' << r.trace_checksum;
  for (const auto& [name, value] : r.metrics()) os << ',' << fmt_double(value);
  os << '\n';
}

// ---------------------------------------------------------------------------
// Radio scenario

struct RadioSetup {
  std::vector<SliceConfig> slices;
  std::array<SlaSpec, kSliceCount> slas{};
  std::vector<SliceId> user_slice;
  std::vector<UserLink> links;
  std::array<double, kSliceCount> expected{};
};

RadioSetup make_radio_setup(const ExperimentConfig& cfg) {
  RadioSetup s;
  s.slices = experiment_slices(cfg.radio);
  for (const auto& sc : s.slices) {
    s.slas[static_cast<std::size_t>(sc.slice_id)] = sc.sla;
    for (std::size_t i = 0; i < sc.user_count; ++i) s.user_slice.push_back(sc.slice_id);
  }
  Rng placement = make_stream(cfg.seed, {kPlacementLabel});
  const auto distances =
      place_users(s.user_slice.size(), cfg.radio.cell_radius, cfg.radio.min_distance, placement);
  s.links = make_links(distances, cfg.radio.env.link);
  s.expected = expected_arrivals(s.slices, cfg.radio.env.epoch_duration);
  return s;
}

RadioEnvConfig env_config_for(const ExperimentConfig& cfg) {
  RadioEnvConfig env = cfg.radio.env;
  env.pooled_scheduling = cfg.scheme == Scheme::kNone;
  return env;
}

/// Chooses the allocation for the next epoch from the previous epoch's state.
class RadioPolicy {
 public:
  virtual ~RadioPolicy() = default;
  virtual BandwidthAllocation decide(const RadioState& previous) = 0;
};

class FixedPolicy : public RadioPolicy {
 public:
  explicit FixedPolicy(BandwidthAllocation a) : a_(std::move(a)) {}
  BandwidthAllocation decide(const RadioState&) override { return a_; }

 private:
  BandwidthAllocation a_;
};

class DemandPolicy : public RadioPolicy {
 public:
  DemandPolicy(const ExperimentConfig& cfg, bool rate_weighted)
      : predictor_(cfg.radio.predictor == PredictorMethod::kExponentialSmoothing
                       ? DemandPredictor::exponential_smoothing(cfg.radio.smoothing_factor)
                       : DemandPredictor::sliding_window(cfg.radio.window_width)),
        rate_weighted_(rate_weighted),
        total_(cfg.radio.env.total_bandwidth),
        granularity_(cfg.radio.baseline_granularity) {
    rates_.rate = cfg.radio.required_rates;
  }

  BandwidthAllocation decide(const RadioState& previous) override {
    std::vector<double> counts(kSliceCount);
    for (std::size_t s = 0; s < kSliceCount; ++s) counts[s] = static_cast<double>(previous.arrived_packets[s]);
    std::vector<double> predicted(kSliceCount, 0.0);
    if (started_) predicted = predict_demand(predictor_, counts);
    started_ = true;
    return rate_weighted_ ? dp_bw_allocation(predicted, rates_, total_, granularity_)
                          : dp_no_allocation(predicted, total_, granularity_);
  }

 private:
  DemandPredictor predictor_;
  RequiredRates rates_;
  bool rate_weighted_;
  double total_;
  double granularity_;
  bool started_ = false;
};

class GreedyNetPolicy : public RadioPolicy {
 public:
  GreedyNetPolicy(const QNetwork& net, std::vector<BandwidthAllocation> actions,
                  std::array<double, kSliceCount> expected)
      : net_(net), actions_(std::move(actions)), expected_(expected) {}

  BandwidthAllocation decide(const RadioState& previous) override {
    const auto x = encode_radio_state(previous, expected_);
    const Eigen::VectorXd q = net_.forward(x);
    return actions_[argmax(std::span<const double>(q.data(), static_cast<std::size_t>(q.size())))];
  }

 private:
  const QNetwork& net_;
  std::vector<BandwidthAllocation> actions_;
  std::array<double, kSliceCount> expected_;
};

struct RadioTotals {
  double se = 0.0;
  double reward = 0.0;
  std::array<double, kSliceCount> arrivals{};
  std::array<double, kSliceCount> satisfied{};
  std::array<double, kSliceCount> share{};
  std::size_t epochs = 0;
};

RadioSummary summarize(const RadioTotals& t, QoeAggregation aggregation) {
  RadioSummary s;
  const double n = static_cast<double>(t.epochs);
  s.se = t.se / n;
  s.mean_reward = t.reward / n;
  double arr = 0.0;
  double sat = 0.0;
  double mean = 0.0;
  for (std::size_t k = 0; k < kSliceCount; ++k) {
    s.qoe[k] = t.arrivals[k] > 0.0 ? std::min(1.0, t.satisfied[k] / t.arrivals[k]) : 1.0;
    s.bandwidth_share[k] = t.share[k] / n;
    arr += t.arrivals[k];
    sat += t.satisfied[k];
    mean += s.qoe[k];
  }
  s.qoe_aggregate = aggregation == QoeAggregation::kPooled ? (arr > 0.0 ? std::min(1.0, sat / arr) : 1.0)
                                                           : mean / static_cast<double>(kSliceCount);
  return s;
}

/// Runs the evaluation trace under `policy`; returns the summary and the
/// trace checksum, streaming epoch rows to `epochs_csv` when given.
RadioSummary evaluate_radio(const ExperimentConfig& cfg, const RadioSetup& setup, RadioPolicy& policy,
                            std::uint64_t& checksum, std::ostream* epochs_csv) {
  RadioEnv env(env_config_for(cfg), setup.links, setup.user_slice, setup.slas,
               derive_seed(cfg.seed, kEvalFadingLabel));
  PacketSource source(setup.slices, derive_seed(cfg.seed, kEvalTraceLabel));
  const double T = cfg.radio.env.epoch_duration;
  const double W = cfg.radio.env.total_bandwidth;
  checksum = 0xcbf29ce484222325ULL;
  RadioTotals totals;
  RadioState previous{};
  std::vector<PacketEvent> events;
  if (epochs_csv) write_epoch_csv_header(*epochs_csv);
  for (std::size_t e = 0; e < cfg.radio.eval_epochs; ++e) {
    events.clear();
    source.next_window(static_cast<double>(e) * T, static_cast<double>(e + 1) * T, events);
    checksum = trace_checksum(events, checksum);
    const BandwidthAllocation a = policy.decide(previous);
    const RadioStep step = env.step(a, events);
    previous = step.state;
    totals.se += step.metrics.se;
    totals.reward += step.metrics.reward;
    for (std::size_t k = 0; k < kSliceCount; ++k) {
      totals.arrivals[k] += static_cast<double>(step.log.slices[k].arrivals);
      totals.satisfied[k] += static_cast<double>(step.log.slices[k].satisfied);
      totals.share[k] += a.per_slice[k] / W;
    }
    ++totals.epochs;
    if (epochs_csv) write_epoch_csv_row(*epochs_csv, e, step.metrics);
  }
  return summarize(totals, cfg.radio.env.reward.aggregation);
}

QNetwork train_radio(const ExperimentConfig& cfg, const RadioSetup& setup,
                     const std::vector<BandwidthAllocation>& actions, std::size_t& updates,
                     std::ostream* training_csv) {
  RadioEnv env(env_config_for(cfg), setup.links, setup.user_slice, setup.slas,
               derive_seed(cfg.seed, kTrainFadingLabel));
  PacketSource source(setup.slices, derive_seed(cfg.seed, kTrainTraceLabel));
  DqnAgent agent(kSliceCount, actions.size(), cfg.agent, derive_seed(cfg.seed, kAgentLabel));
  RewardNormalizer normalizer(cfg.radio.normalization);
  std::vector<Experience> held;

  if (training_csv) {
    *training_csv << "episode,action,w_volte_hz,w_video_hz,w_urllc_hz,se,qoe_aggregate,reward,epsilon,loss\n";
  }
  const double T = cfg.radio.env.epoch_duration;
  RadioState previous{};
  std::vector<PacketEvent> events;
  // Guards against a configuration that can never reach the update count.
  const std::size_t max_epochs = cfg.radio.training_updates + cfg.radio.normalization.calibration +
                                 cfg.agent.batch_size + 1;
  for (std::size_t e = 0; agent.updates() < cfg.radio.training_updates && e < max_epochs; ++e) {
    const auto x = encode_radio_state(previous, setup.expected);
    const double eps = agent.epsilon();
    const std::size_t a = agent.act(x);
    events.clear();
    source.next_window(static_cast<double>(e) * T, static_cast<double>(e + 1) * T, events);
    const RadioStep step = env.step(actions[a], events);
    previous = step.state;
    const double raw = step.metrics.reward;
    Experience ex{x, a, encode_radio_state(step.state, setup.expected), raw, false};
    if (normalizer.calibrated()) {
      ex.reward = normalizer(raw);
      agent.remember(std::move(ex));
    } else {
      held.push_back(std::move(ex));
      if (normalizer.observe(raw)) {
        for (auto& h : held) {
          h.reward = normalizer(h.reward);
          agent.remember(std::move(h));
        }
        held.clear();
      }
    }
    const auto loss = agent.end_episode();
    if (training_csv) {
      const auto& w = actions[a].per_slice;
      *training_csv << e << ',' << a << ',' << fmt_double(w[0]) << ',' << fmt_double(w[1]) << ','
                    << fmt_double(w[2]) << ',' << fmt_double(step.metrics.se) << ','
                    << fmt_double(step.metrics.qoe_aggregate) << ',' << fmt_double(raw) << ',' << fmt_double(eps)
                    << ',' << (loss ? fmt_double(*loss) : std::string()) << '\n';
    }
  }
  updates = agent.updates();
  return agent.eval_net();
}

RunResult run_radio(const ExperimentConfig& cfg, const QNetwork* pretrained) {
  RunResult result;
  result.config = cfg;
  const RadioSetup setup = make_radio_setup(cfg);
  const bool files = !cfg.output_dir.empty();

  std::unique_ptr<RadioPolicy> policy;
  const double W = cfg.radio.env.total_bandwidth;
  switch (cfg.scheme) {
    case Scheme::kHard:
    case Scheme::kNone:
      // Pooled scheduling ignores the split; the equal split is reported.
      policy = std::make_unique<FixedPolicy>(hard_slicing(W, kSliceCount, cfg.radio.baseline_granularity));
      break;
    case Scheme::kDpNo: policy = std::make_unique<DemandPolicy>(cfg, false); break;
    case Scheme::kDpBw: policy = std::make_unique<DemandPolicy>(cfg, true); break;
    case Scheme::kDql: {
      const auto actions = action_space(W, cfg.radio.action_granularity, kSliceCount);
      if (pretrained) {
        if (pretrained->input_dim() != kSliceCount || pretrained->output_dim() != actions.size()) {
          throw ConfigError("checkpoint dimensions do not match the radio action space");
        }
        result.network = *pretrained;
      } else {
        std::ofstream training;
        if (files) training = open_output(cfg.output_dir, "training.csv");
        result.network = train_radio(cfg, setup, actions, result.updates, files ? &training : nullptr);
      }
      policy = std::make_unique<GreedyNetPolicy>(*result.network, actions, setup.expected);
      break;
    }
    case Scheme::kNoPriority: throw ConfigError("no_priority is an SFC scheme");
  }

  std::ofstream epochs;
  if (files) epochs = open_output(cfg.output_dir, "epochs.csv");
  result.radio = evaluate_radio(cfg, setup, *policy, result.trace_checksum, files ? &epochs : nullptr);
  return result;
}

// ---------------------------------------------------------------------------
// SFC scenario

struct PendingFlow {
  std::vector<double> state;
  std::size_t action = 0;
  std::optional<std::vector<double>> next_state;
  std::optional<double> reward;
  bool terminal = false;
};

QNetwork train_sfc(const ExperimentConfig& cfg, std::size_t& updates, std::ostream* training_csv) {
  const auto trace = generate_flow_trace(cfg.sfc.rates, cfg.sfc.training_flows,
                                         derive_seed(cfg.seed, kTrainTraceLabel));
  DqnAgent agent(kSfcStateDim, kSfcCount, cfg.agent, derive_seed(cfg.seed, kAgentLabel));
  RewardNormalizer normalizer(cfg.sfc.normalization);
  SfcSystem system;
  SfcHistory history;
  std::vector<PendingFlow> pending(trace.events.size());
  std::vector<Experience> held;

  auto try_finalize = [&](std::size_t i) {
    PendingFlow& p = pending[i];
    if (!p.reward || !p.next_state) return;
    Experience ex{std::move(p.state), p.action, std::move(*p.next_state), *p.reward, p.terminal};
    p = PendingFlow{};
    if (normalizer.calibrated()) {
      ex.reward = normalizer(ex.reward);
      agent.remember(std::move(ex));
      return;
    }
    const double raw = ex.reward;
    held.push_back(std::move(ex));
    if (normalizer.observe(raw)) {
      for (auto& h : held) {
        h.reward = normalizer(h.reward);
        agent.remember(std::move(h));
      }
      held.clear();
    }
  };

  auto collect = [&](std::ostream* csv) {
    for (const auto& f : system.take_completed()) {
      const double r = flow_reward(f, cfg.sfc.reward);
      pending[f.index].reward = r;
      if (csv) *csv << f.index << ",completion," << fmt_double(f.completion_time) << ',' << fmt_double(r) << '\n';
      try_finalize(f.index);
    }
  };

  if (training_csv) *training_csv << "flow,event,time_s,value\n";
  for (std::size_t i = 0; i < trace.events.size(); ++i) {
    const auto& ev = trace.events[i];
    system.advance_to(ev.arrival_time);
    collect(training_csv);
    auto x = encode_state(observe_state(history, ev.category, ev.arrival_time), cfg.sfc.gap_scale);
    if (i > 0) {
      pending[i - 1].next_state = x;
      try_finalize(i - 1);
    }
    const std::size_t a = agent.act(x);
    pending[i].state = x;
    pending[i].action = a;
    if (i + 1 == trace.events.size()) {
      pending[i].terminal = true;
      pending[i].next_state = x;
    }
    system.assign(i, ev.category, ev.arrival_time, static_cast<SfcId>(a), ev.arrival_time);
    history.record(static_cast<SfcId>(a), ev.category, ev.arrival_time);
    const auto loss = agent.end_episode();
    if (training_csv && loss) *training_csv << i << ",loss," << fmt_double(ev.arrival_time) << ',' << fmt_double(*loss) << '\n';
  }
  updates = agent.updates();
  return agent.eval_net();
}

RunResult run_sfc(const ExperimentConfig& cfg, const QNetwork* pretrained) {
  RunResult result;
  result.config = cfg;
  const bool files = !cfg.output_dir.empty();

  if (cfg.scheme == Scheme::kDql) {
    if (pretrained) {
      if (pretrained->input_dim() != kSfcStateDim || pretrained->output_dim() != kSfcCount) {
        throw ConfigError("checkpoint dimensions do not match the SFC state/action space");
      }
      result.network = *pretrained;
    } else {
      std::ofstream training;
      if (files) training = open_output(cfg.output_dir, "training.csv");
      result.network = train_sfc(cfg, result.updates, files ? &training : nullptr);
    }
  } else if (cfg.scheme != Scheme::kNoPriority) {
    throw ConfigError("scheme is not available for the sfc scenario");
  }

  const auto trace = generate_flow_trace(cfg.sfc.rates, cfg.sfc.flow_count, derive_seed(cfg.seed, kEvalTraceLabel));
  result.trace_checksum = trace_checksum(trace.events);
  SfcSystem system;
  SfcHistory history;
  for (std::size_t i = 0; i < trace.events.size(); ++i) {
    const auto& ev = trace.events[i];
    system.advance_to(ev.arrival_time);
    SfcId choice;
    if (result.network) {
      const auto x = encode_state(observe_state(history, ev.category, ev.arrival_time), cfg.sfc.gap_scale);
      const Eigen::VectorXd q = result.network->forward(x);
      choice = static_cast<SfcId>(argmax(std::span<const double>(q.data(), static_cast<std::size_t>(q.size()))));
    } else {
      choice = no_priority_assign(system, ev.category);
    }
    system.assign(i, ev.category, ev.arrival_time, choice, ev.arrival_time);
    history.record(choice, ev.category, ev.arrival_time);
  }
  system.drain();
  auto done = system.take_completed();
  std::sort(done.begin(), done.end(), [](const FlowRecord& a, const FlowRecord& b) { return a.index < b.index; });

  SfcSummary s;
  s.flows = done.size();
  std::array<double, kCategoryCount> sojourn_sum{};
  std::array<std::size_t, kCategoryCount> per_category{};
  double weighted = 0.0;
  double waiting = 0.0;
  double last_completion = 0.0;
  for (const auto& f : done) {
    const auto c = static_cast<std::size_t>(f.category);
    sojourn_sum[c] += f.sojourn();
    ++per_category[c];
    weighted += -flow_reward(f, cfg.sfc.reward);
    waiting += f.queue_time;
    s.sfc_share[static_cast<std::size_t>(f.assigned_sfc)] += 1.0;
    last_completion = std::max(last_completion, f.completion_time);
  }
  const double n = static_cast<double>(std::max<std::size_t>(done.size(), 1));
  for (std::size_t c = 0; c < kCategoryCount; ++c) {
    s.mean_sojourn[c] = per_category[c] ? sojourn_sum[c] / static_cast<double>(per_category[c]) : 0.0;
  }
  for (double& share : s.sfc_share) share /= n;
  s.weighted_sojourn_a = cfg.sfc.reward.category_weights[0] * s.mean_sojourn[0];
  s.weighted_sojourn = weighted / n;
  s.mean_waiting = waiting / n;
  const double start = trace.events.front().arrival_time;
  s.cpu_utilization = last_completion > start ? cpu_utilization(system.busy_log(), system.specs(), start, last_completion)
                                              : 0.0;
  result.sfc = s;

  if (files) {
    auto flows = open_output(cfg.output_dir, "flows.csv");
    write_flow_csv_header(flows);
    for (const auto& f : done) write_flow_csv_row(flows, f, flow_reward(f, cfg.sfc.reward));

    auto windows = open_output(cfg.output_dir, "windows.csv");
    windows << "window_start_s,flows,mean_waiting_s,cpu_utilization\n";
    const double w = cfg.sfc.csv_window;
    const auto count = static_cast<std::size_t>(std::ceil(last_completion / w));
    std::vector<double> wait_sum(count, 0.0);
    std::vector<std::size_t> wait_n(count, 0);
    for (const auto& f : done) {
      const auto k = std::min(count - 1, static_cast<std::size_t>(f.arrival_time / w));
      wait_sum[k] += f.queue_time;
      ++wait_n[k];
    }
    for (std::size_t k = 0; k < count; ++k) {
      const double from = static_cast<double>(k) * w;
      windows << fmt_double(from) << ',' << wait_n[k] << ','
              << fmt_double(wait_n[k] ? wait_sum[k] / static_cast<double>(wait_n[k]) : 0.0) << ','
              << fmt_double(cpu_utilization(system.busy_log(), system.specs(), from, from + w)) << '\n';
    }
  }
  return result;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg, const QNetwork* pretrained) {
  validate(cfg);
  if (!cfg.output_dir.empty()) fs::create_directories(cfg.output_dir);
  RunResult result = cfg.scenario == Scenario::kRadio ? run_radio(cfg, pretrained) : run_sfc(cfg, pretrained);
  if (!cfg.output_dir.empty()) {
    auto summary = open_output(cfg.output_dir, "summary.csv");
    write_summary_header(summary, result);
    write_summary_row(summary, result);
    auto echo = open_output(cfg.output_dir, "config.json");
    echo << config_echo(cfg);
    if (result.network && cfg.write_checkpoint && !pretrained) {
      save_checkpoint((fs::path(cfg.output_dir) / "checkpoint.nsqn").string(), *result.network, config_echo(cfg));
    }
  }
  return result;
}

// ---------------------------------------------------------------------------

const MetricStats& SchemeReport::metric(std::string_view name) const {
  for (const auto& m : metrics) {
    if (m.name == name) return m;
  }
  throw ContractViolation("no metric named " + std::string(name));
}

const SchemeReport& ComparisonReport::scheme(Scheme s) const {
  for (const auto& r : schemes) {
    if (r.scheme == s) return r;
  }
  throw ContractViolation("scheme " + std::string(to_string(s)) + " not in report");
}

namespace {

MetricStats make_stats(std::string name, std::vector<double> values) {
  MetricStats m;
  m.name = std::move(name);
  m.values = std::move(values);
  const double n = static_cast<double>(m.values.size());
  m.mean = std::accumulate(m.values.begin(), m.values.end(), 0.0) / n;
  if (m.values.size() > 1) {
    double ss = 0.0;
    for (double v : m.values) ss += (v - m.mean) * (v - m.mean);
    m.stddev = std::sqrt(ss / (n - 1.0));
  }
  return m;
}

std::string run_dir(const std::string& root, const ExperimentConfig& cfg, std::size_t index) {
  return (fs::path(root) / (std::to_string(index) + "_" + std::string(to_string(cfg.scheme)) + "_seed" +
                            std::to_string(cfg.seed)))
      .string();
}

}  // namespace

ComparisonReport compare(const std::vector<ExperimentConfig>& configs, std::span<const std::uint64_t> seeds,
                         const std::string& output_dir) {
  if (configs.empty()) throw ConfigError("compare needs at least one scheme");
  if (seeds.empty()) throw ConfigError("compare needs at least one seed");
  for (const auto& c : configs) {
    if (c.scenario != configs.front().scenario) throw ConfigError("compared configurations mix scenarios");
    validate(c);
  }

  ComparisonReport report;
  report.scenario = configs.front().scenario;
  std::vector<std::vector<RunResult>> runs(configs.size());
  for (std::size_t k = 0; k < configs.size(); ++k) {
    for (std::uint64_t seed : seeds) {
      ExperimentConfig c = configs[k];
      c.seed = seed;
      c.output_dir = output_dir.empty() ? std::string() : run_dir(output_dir, c, k);
      runs[k].push_back(run_experiment(c));
    }
  }
  // Paired evaluation: every scheme must have seen the same traces.
  for (std::size_t j = 0; j < seeds.size(); ++j) {
    for (std::size_t k = 1; k < configs.size(); ++k) {
      if (runs[k][j].trace_checksum != runs[0][j].trace_checksum) {
        throw ContractViolation("schemes saw different evaluation traces for seed " + std::to_string(seeds[j]));
      }
    }
  }

  for (std::size_t k = 0; k < configs.size(); ++k) {
    SchemeReport sr;
    sr.scheme = configs[k].scheme;
    const auto names = runs[k].front().metrics();
    for (std::size_t m = 0; m < names.size(); ++m) {
      std::vector<double> values;
      for (const auto& r : runs[k]) values.push_back(r.metrics()[m].second);
      sr.metrics.push_back(make_stats(names[m].first, std::move(values)));
    }
    for (const auto& r : runs[k]) {
      sr.seeds.push_back(r.config.seed);
      sr.trace_checksums.push_back(r.trace_checksum);
    }
    report.schemes.push_back(std::move(sr));
  }

  if (!output_dir.empty()) {
    fs::create_directories(output_dir);
    auto summary = open_output(output_dir, "summary.csv");
    write_summary_header(summary, runs.front().front());
    for (const auto& scheme_runs : runs) {
      for (const auto& r : scheme_runs) write_summary_row(summary, r);
    }
    auto rep = open_output(output_dir, "report.csv");
    write_report_csv(rep, report);
  }
  return report;
}

void write_report_csv(std::ostream& os, const ComparisonReport& report) {
  os << "scheme,metric,mean,stddev,replications\n";
  for (const auto& s : report.schemes) {
    for (const auto& m : s.metrics) {
      os << to_string(s.scheme) << ',' << m.name << ',' << fmt_double(m.mean) << ',' << fmt_double(m.stddev) << ','
         << m.values.size() << '\n';
    }
  }
}

SweepAxis parse_sweep_axis(std::string_view s) {
  if (s == "qoe_weight") return SweepAxis::kQoeWeight;
  if (s == "antenna_count") return SweepAxis::kAntennaCount;
  throw ConfigError("unknown sweep axis '" + std::string(s) + "' (expected qoe_weight or antenna_count)");
}

std::string_view to_string(SweepAxis a) { return a == SweepAxis::kQoeWeight ? "qoe_weight" : "antenna_count"; }

std::vector<SweepPoint> sweep(const std::vector<ExperimentConfig>& base, SweepAxis axis,
                              std::span<const double> values, std::span<const std::uint64_t> seeds,
                              const std::string& output_dir) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  std::vector<SweepPoint> out;
  for (double v : values) {
    std::vector<ExperimentConfig> configs = base;
    for (auto& c : configs) {
      if (c.scenario != Scenario::kRadio) throw ConfigError("sweeps apply to the radio scenario");
      if (axis == SweepAxis::kQoeWeight) {
        c.radio.env.reward.qoe_weight = v;
      } else {
        if (!(v >= 1.0) || v != std::floor(v)) throw ConfigError("antenna_count values must be positive integers");
        c.radio.env.link.antenna_count = static_cast<std::size_t>(v);
      }
    }
    const std::string dir =
        output_dir.empty() ? std::string() : (fs::path(output_dir) / (std::string(to_string(axis)) + "_" + fmt_double(v))).string();
    out.push_back(SweepPoint{v, compare(configs, seeds, dir)});
  }
  return out;
}

}  // namespace netslice
