#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "netslice/rng.hpp"

namespace netslice {

enum class SliceId : std::uint8_t { kVoLTE = 0, kVideo = 1, kUrllc = 2 };
inline constexpr std::size_t kSliceCount = 3;

std::string_view to_string(SliceId id);

// ---------------------------------------------------------------------------
// Inter-arrival models (seconds)

struct UniformGap {
  double min = 0.0;
  double max = 0.0;
};

/// Pareto with shape `shape`, truncated at `max`. The scale is solved so that
/// the truncated mean equals `mean`.
struct TruncatedParetoGap {
  double shape = 0.0;
  double mean = 0.0;
  double max = 0.0;
};

struct ExponentialGap {
  double mean = 0.0;
};

/// Parameters of the underlying normal in log-seconds.
struct LognormalGap {
  double mu = 0.0;
  double sigma = 0.0;
};

using InterArrivalModel = std::variant<UniformGap, TruncatedParetoGap, ExponentialGap, LognormalGap>;

// ---------------------------------------------------------------------------
// Packet size models (bytes)

struct ConstantSize {
  double size = 0.0;
};

struct TruncatedParetoSize {
  double shape = 0.0;
  double mean = 0.0;
  double max = 0.0;
};

/// Lognormal truncated at `max`; (mu, sigma) solved so the truncated
/// distribution has the configured mean and standard deviation.
struct TruncatedLognormalSize {
  double mean = 0.0;
  double stddev = 0.0;
  double max = 0.0;
};

using PacketSizeModel = std::variant<ConstantSize, TruncatedParetoSize, TruncatedLognormalSize>;

/// Throws ConfigError when parameters break the model's invariants.
void validate(const InterArrivalModel& model);
void validate(const PacketSizeModel& model);

// ---------------------------------------------------------------------------
// Truncated-distribution solvers

/// Mean of a Pareto(shape, scale) truncated to [scale, max].
double truncated_pareto_mean(double shape, double scale, double max);

/// Scale such that truncated_pareto_mean(shape, scale, max) == mean.
double solve_truncated_pareto_scale(double shape, double mean, double max);

struct LognormalParams {
  double mu = 0.0;
  double sigma = 0.0;
};

/// First two moments (mean, stddev) of lognormal(mu, sigma) truncated above at max.
std::array<double, 2> truncated_lognormal_moments(LognormalParams p, double max);

/// Underlying normal parameters reproducing the truncated mean and stddev.
LognormalParams solve_truncated_lognormal(double mean, double stddev, double max);

/// Draws one value from a Pareto(shape, scale) truncated at max by inversion.
double sample_truncated_pareto(double shape, double scale, double max, Rng& rng);

double sample_standard_normal(Rng& rng);

// ---------------------------------------------------------------------------
// Samplers with the truncation parameters resolved once

class InterArrivalSampler {
 public:
  explicit InterArrivalSampler(const InterArrivalModel& model);
  double operator()(Rng& rng) const;
  const InterArrivalModel& model() const { return model_; }

 private:
  InterArrivalModel model_;
  double pareto_scale_ = 0.0;
};

class PacketSizeSampler {
 public:
  explicit PacketSizeSampler(const PacketSizeModel& model);
  double operator()(Rng& rng) const;
  const PacketSizeModel& model() const { return model_; }

 private:
  PacketSizeModel model_;
  double pareto_scale_ = 0.0;
  LognormalParams lognormal_{};
};

/// One-shot convenience wrappers; resolve truncation parameters on every call.
double sample_inter_arrival(const InterArrivalModel& model, Rng& rng);
double sample_packet_size(const PacketSizeModel& model, Rng& rng);

// ---------------------------------------------------------------------------
// Slices and traces

struct SlaSpec {
  double min_rate = 0.0;     // bits/s
  double max_latency = 0.0;  // seconds
};

struct SliceConfig {
  SliceId slice_id = SliceId::kVoLTE;
  std::size_t user_count = 0;
  InterArrivalModel inter_arrival = UniformGap{};
  PacketSizeModel packet_size = ConstantSize{};
  SlaSpec sla{};
};

void validate(const SliceConfig& slice);

/// The three slices with the reference traffic models and SLAs.
/// Default user counts are 46/46/8.
std::vector<SliceConfig> default_slices(std::size_t volte_users = 46, std::size_t video_users = 46,
                                        std::size_t urllc_users = 8);

struct PacketEvent {
  double arrival_time = 0.0;  // seconds
  std::uint32_t user_id = 0;
  SliceId slice_id = SliceId::kVoLTE;
  double size = 0.0;  // bytes

  bool operator==(const PacketEvent&) const = default;
};

struct PacketTrace {
  std::vector<PacketEvent> events;
};

/// Streams per-user renewal arrivals in time windows. Each user owns an
/// independent random stream derived from (seed, user id), so the output does
/// not depend on how the horizon is chunked into windows.
///
/// Users are numbered slice by slice in the order of `slices`.
class PacketSource {
 public:
  PacketSource(std::vector<SliceConfig> slices, std::uint64_t seed);

  /// Appends every arrival in [from, to) to `out`, sorted by time. Windows
  /// must be requested in increasing, contiguous order.
  void next_window(double from, double to, std::vector<PacketEvent>& out);

  std::size_t user_count() const { return users_.size(); }
  SliceId slice_of(std::uint32_t user) const { return users_[user].slice; }
  const std::vector<SliceConfig>& slices() const { return slices_; }

 private:
  struct UserStream {
    SliceId slice;
    std::size_t slice_index;
    Rng rng;
    double next_arrival;
  };

  std::vector<SliceConfig> slices_;
  std::vector<InterArrivalSampler> gap_samplers_;
  std::vector<PacketSizeSampler> size_samplers_;
  std::vector<UserStream> users_;
  std::vector<PacketEvent> scratch_;
};

PacketTrace generate_packet_trace(const std::vector<SliceConfig>& slices, double horizon,
                                  std::uint64_t seed);

/// 64-bit FNV-1a over the event fields; folds windows incrementally.
std::uint64_t trace_checksum(std::span<const PacketEvent> events,
                             std::uint64_t seed = 0xcbf29ce484222325ULL);

void write_packet_trace_csv(std::ostream& os, const PacketTrace& trace);

// ---------------------------------------------------------------------------
// SFC flows

enum class FlowCategory : std::uint8_t { kA = 0, kB = 1, kC = 2 };
inline constexpr std::size_t kCategoryCount = 3;

std::string_view to_string(FlowCategory c);

struct FlowEvent {
  double arrival_time = 0.0;
  FlowCategory category = FlowCategory::kA;

  bool operator==(const FlowEvent&) const = default;
};

struct FlowTrace {
  std::vector<FlowEvent> events;
};

/// Per-category lognormal inter-arrival models, indexed by FlowCategory.
using FlowRates = std::array<LognormalGap, kCategoryCount>;

/// mu = ln(0.02 s), sigma = 0.5 for every category.
FlowRates default_flow_rates();

/// Exactly `count` flows: each category runs its own renewal stream and the
/// streams are merged by arrival time (ties broken by category).
FlowTrace generate_flow_trace(const FlowRates& rates, std::size_t count, std::uint64_t seed);

std::uint64_t trace_checksum(std::span<const FlowEvent> events,
                             std::uint64_t seed = 0xcbf29ce484222325ULL);

void write_flow_trace_csv(std::ostream& os, const FlowTrace& trace);

// ---------------------------------------------------------------------------
// User placement

/// Uniform over a disc of `radius` meters: r = radius * sqrt(u). Distances are
/// floored at `min_distance` so path loss stays finite.
std::vector<double> place_users(std::size_t count, double radius, double min_distance, Rng& rng);

}  // namespace netslice
