#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "netslice/config.hpp"
#include "netslice/dqn.hpp"

namespace netslice {

/// Frozen affine map fitted to the first `calibration` raw rewards.
class RewardNormalizer {
 public:
  explicit RewardNormalizer(RewardNormalization cfg);

  /// Collects raw rewards until the calibration window is full; returns true
  /// on the call that completes calibration.
  bool observe(double raw);
  bool calibrated() const { return calibrated_; }
  /// clip((raw - offset) / scale); requires calibrated().
  double operator()(double raw) const;
  double offset() const { return offset_; }
  double scale() const { return scale_; }

 private:
  RewardNormalization cfg_;
  std::vector<double> samples_;
  bool calibrated_ = false;
  double offset_ = 0.0;
  double scale_ = 1.0;
};

/// Independent 64-bit seed for a labelled purpose (trace, agent, fading...).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t label);

/// Expected packet arrivals per slice in one epoch.
std::array<double, kSliceCount> expected_arrivals(const std::vector<SliceConfig>& slices, double epoch_duration);

/// Arrival counts divided by their expected values.
std::vector<double> encode_radio_state(const RadioState& state, const std::array<double, kSliceCount>& expected);

std::vector<SliceConfig> experiment_slices(const RadioExperiment& r);

struct RadioSummary {
  double se = 0.0;
  std::array<double, kSliceCount> qoe{};
  double qoe_aggregate = 0.0;
  double mean_reward = 0.0;
  std::array<double, kSliceCount> bandwidth_share{};
};

struct SfcSummary {
  std::size_t flows = 0;
  std::array<double, kCategoryCount> mean_sojourn{};
  double weighted_sojourn_a = 0.0;
  double weighted_sojourn = 0.0;
  double mean_waiting = 0.0;
  double cpu_utilization = 0.0;
  std::array<double, kSfcCount> sfc_share{};
};

struct RunResult {
  ExperimentConfig config;
  std::uint64_t trace_checksum = 0;  // evaluation trace
  std::optional<RadioSummary> radio;
  std::optional<SfcSummary> sfc;
  std::optional<QNetwork> network;  // dql only
  std::size_t updates = 0;

  /// Named summary values in a fixed, scenario-specific order.
  std::vector<std::pair<std::string, double>> metrics() const;
};

/// Trains (dql, unless `pretrained` is given) and evaluates one scheme. When
/// cfg.output_dir is set, writes the per-epoch or per-flow CSVs, summary.csv,
/// config.json and, for dql, checkpoint.nsqn.
RunResult run_experiment(const ExperimentConfig& cfg, const QNetwork* pretrained = nullptr);

struct MetricStats {
  std::string name;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation; 0 for one replication
  std::vector<double> values;  // per seed, in seed order
};

struct SchemeReport {
  Scheme scheme = Scheme::kHard;
  std::vector<std::uint64_t> seeds;
  std::vector<std::uint64_t> trace_checksums;
  std::vector<MetricStats> metrics;

  const MetricStats& metric(std::string_view name) const;
};

struct ComparisonReport {
  Scenario scenario = Scenario::kRadio;
  std::vector<SchemeReport> schemes;

  const SchemeReport& scheme(Scheme s) const;
};

/// Runs every (config, seed) pair; the seed overrides each config's seed so
/// all schemes see identical traces. Writes summary.csv and report.csv to
/// `output_dir` when it is not empty.
ComparisonReport compare(const std::vector<ExperimentConfig>& configs, std::span<const std::uint64_t> seeds,
                         const std::string& output_dir = "");

enum class SweepAxis : std::uint8_t { kQoeWeight, kAntennaCount };

SweepAxis parse_sweep_axis(std::string_view s);
std::string_view to_string(SweepAxis a);

struct SweepPoint {
  double value = 0.0;
  ComparisonReport report;
};

std::vector<SweepPoint> sweep(const std::vector<ExperimentConfig>& base, SweepAxis axis,
                              std::span<const double> values, std::span<const std::uint64_t> seeds,
                              const std::string& output_dir = "");

void write_report_csv(std::ostream& os, const ComparisonReport& report);

}  // namespace netslice
