#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "netslice/channel.hpp"
#include "netslice/rng.hpp"
#include "netslice/traffic.hpp"

namespace netslice {

/// Per-slice bandwidths in Hz, indexed by SliceId.
struct BandwidthAllocation {
  std::vector<double> per_slice;

  double total() const;
  bool operator==(const BandwidthAllocation&) const = default;
};

/// Throws ContractViolation unless every entry is >= 0 and they sum to
/// `total_bandwidth` (relative tolerance 1e-9).
void check_allocation(const BandwidthAllocation& a, std::size_t slice_count, double total_bandwidth);

/// Every composition of `total_bandwidth` into `slice_count` nonnegative
/// multiples of `granularity`, in lexicographic order of the unit counts.
std::vector<BandwidthAllocation> action_space(double total_bandwidth, double granularity,
                                              std::size_t slice_count);

/// How a completed packet is judged against its slice SLA.
///  - kEndToEnd: delay = finish - arrival must be within the latency bound and
///    size / delay must reach the rate floor.
///  - kServiceStart: the wait until the first transmitted bit must be within
///    the latency bound and size / (finish - service start) must reach the
///    rate floor.
enum class SlaReading : std::uint8_t { kEndToEnd, kServiceStart };

/// kPooled: satisfied / arrived over all slices. kSliceMean: mean of the
/// per-slice ratios.
enum class QoeAggregation : std::uint8_t { kPooled, kSliceMean };

struct RewardConfig {
  double se_weight = 0.1;
  double qoe_weight = 5000.0;
  QoeAggregation aggregation = QoeAggregation::kPooled;
};

void validate(const RewardConfig& cfg);

struct PacketCompletion {
  double arrival_time = 0.0;
  double service_start = 0.0;
  double finish_time = 0.0;
  double size = 0.0;  // bytes
  std::uint32_t user_id = 0;
  SliceId slice_id = SliceId::kVoLTE;
};

bool packet_satisfied(const PacketCompletion& done, const SlaSpec& sla,
                      SlaReading reading = SlaReading::kEndToEnd);

struct SliceEpochLog {
  std::size_t arrivals = 0;
  std::size_t completed = 0;
  std::size_t satisfied = 0;
  std::size_t dropped = 0;
  double delivered_bits = 0.0;
};

struct EpochLog {
  std::array<SliceEpochLog, kSliceCount> slices{};
  double duration = 1.0;
  /// Independent per-slot sum of min(rate * slot, user backlog); equals the
  /// delivered bits when the scheduler is conservative.
  double capacity_check_bits = 0.0;
};

struct EpochMetrics {
  double se = 0.0;
  std::array<double, kSliceCount> qoe_per_slice{};
  double qoe_aggregate = 0.0;
  double reward = 0.0;
  BandwidthAllocation allocated;
};

/// SE = delivered bits / (duration * W). Per-slice QoE = satisfied
/// completions / arrivals, 1 when nothing arrived, capped at 1.
EpochMetrics compute_epoch_metrics(const EpochLog& log, const BandwidthAllocation& allocation,
                                   const RewardConfig& cfg, double total_bandwidth);

struct RadioState {
  std::array<std::size_t, kSliceCount> arrived_packets{};
};

struct SlotGrant {
  std::size_t member = 0;  // position in the ring
  double bandwidth = 0.0;
};

struct SlotSchedule {
  std::optional<SlotGrant> grant;
  std::size_t cursor = 0;
};

/// Round robin: the whole slice bandwidth goes to the first backlogged ring
/// member at or after `cursor`; the cursor moves one past it. No backlog or
/// zero bandwidth leaves the cursor where it was.
SlotSchedule schedule_slot(std::span<const bool> backlogged, double slice_bandwidth, std::size_t cursor);

struct RadioEnvConfig {
  double total_bandwidth = 10e6;
  double epoch_duration = 1.0;
  LinkConfig link{};
  RewardConfig reward{};
  SlaReading sla_reading = SlaReading::kEndToEnd;
  bool drop_after_deadline = true;
  /// "No slicing": one round-robin ring over every user and the full band.
  bool pooled_scheduling = false;
};

void validate(const RadioEnvConfig& cfg);

struct RadioStep {
  RadioState state;
  EpochMetrics metrics;
  EpochLog log;
};

/// Single-owner slot-level simulator. Queues, round-robin cursors, and the
/// fading stream persist across epochs.
class RadioEnv {
 public:
  /// `user_slice[u]` and `links[u]` describe user u; `slas` is indexed by SliceId.
  RadioEnv(RadioEnvConfig cfg, std::vector<UserLink> links, std::vector<SliceId> user_slice,
           std::array<SlaSpec, kSliceCount> slas, std::uint64_t fading_seed);

  /// Simulates one epoch. `events` must hold exactly the arrivals of
  /// [epoch_start(), epoch_start() + epoch_duration), sorted by time.
  RadioStep step(const BandwidthAllocation& allocation, std::span<const PacketEvent> events);

  double epoch_start() const { return static_cast<double>(epoch_) * cfg_.epoch_duration; }
  std::size_t epoch_index() const { return epoch_; }
  std::size_t slots_per_epoch() const { return slots_per_epoch_; }
  std::size_t queued_packets() const;
  const RadioEnvConfig& config() const { return cfg_; }

 private:
  struct Queued {
    double arrival = 0.0;
    double size = 0.0;       // bytes
    double remaining = 0.0;  // bits
    double service_start = -1.0;
  };

  struct Ring {
    std::vector<std::uint32_t> members;
    std::size_t cursor = 0;
  };

  void purge_expired(std::uint32_t user, double now, EpochLog& log);
  void serve(std::uint32_t user, double bandwidth, double slot_start, EpochLog& log);

  RadioEnvConfig cfg_;
  std::vector<UserLink> links_;
  std::vector<SliceId> user_slice_;
  std::array<SlaSpec, kSliceCount> slas_;
  Rng fading_rng_;
  std::vector<std::deque<Queued>> queues_;
  std::vector<Ring> rings_;
  std::deque<PacketEvent> pending_;
  std::size_t slots_per_epoch_ = 0;
  std::size_t epoch_ = 0;
};

void write_epoch_csv_header(std::ostream& os);
void write_epoch_csv_row(std::ostream& os, std::size_t epoch, const EpochMetrics& m);

}  // namespace netslice
