#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <iosfwd>
#include <span>
#include <vector>

#include "netslice/traffic.hpp"

namespace netslice {

enum class SfcId : std::uint8_t { kI = 0, kII = 1, kIII = 2 };
inline constexpr std::size_t kSfcCount = 3;

std::string_view to_string(SfcId id);

struct SfcSpec {
  SfcId id = SfcId::kI;
  double cpu_cost = 0.0;            // CPUs while serving
  double processing_latency = 0.0;  // seconds per flow
  /// Priority class per FlowCategory; lower classes are served first.
  std::array<int, kCategoryCount> priority_class{};
};

/// I: 2 CPUs, 10 ms, A ahead of B/C. II: 1.5 CPUs, 15 ms, A/B ahead of C.
/// III: 1 CPU, 20 ms, one class.
std::array<SfcSpec, kSfcCount> default_sfcs();

void validate(const SfcSpec& spec);

struct FlowRecord {
  std::size_t index = 0;  // position in the flow trace
  FlowCategory category = FlowCategory::kA;
  double arrival_time = 0.0;
  SfcId assigned_sfc = SfcId::kI;
  double start_time = 0.0;
  double completion_time = 0.0;
  double queue_time = 0.0;
  double processing_time = 0.0;

  double sojourn() const { return queue_time + processing_time; }
};

struct SfcRewardConfig {
  std::array<double, kCategoryCount> category_weights{3.0, 2.0, 1.0};
};

void validate(const SfcRewardConfig& cfg);

/// -weight(category) * (queue time + processing time).
double flow_reward(const FlowRecord& flow, const SfcRewardConfig& cfg);

struct BusyInterval {
  double start = 0.0;
  double end = 0.0;
};

/// Sum over SFCs of cpu_cost * (busy time inside [from, to)) / (to - from).
double cpu_utilization(const std::array<std::vector<BusyInterval>, kSfcCount>& busy,
                       const std::array<SfcSpec, kSfcCount>& specs, double from, double to);

/// Three single-server, non-preemptive priority queues. Each SFC serves one
/// flow at a time for exactly its processing latency; waiting flows are
/// ordered by (priority class, arrival time, trace index).
class SfcSystem {
 public:
  explicit SfcSystem(std::array<SfcSpec, kSfcCount> specs = default_sfcs());

  /// Completes every service ending at or before `now` and starts the next
  /// waiting flow at each completion instant.
  void advance_to(double now);

  /// Advances to `now`, then queues the flow on `sfc` (or starts it at `now`
  /// when that SFC is idle). Requires arrival_time <= now.
  void assign(std::size_t index, FlowCategory category, double arrival_time, SfcId sfc, double now);

  /// Runs until every queued flow has completed.
  void drain();

  /// Remaining service + service of the waiting flows that would be ahead of a
  /// new `category` flow + its own latency, as seen at the current clock.
  double projected_sojourn(SfcId sfc, FlowCategory category) const;

  /// Completed flows since the last call, ordered by completion time.
  std::vector<FlowRecord> take_completed();

  double clock() const { return clock_; }
  bool busy(SfcId sfc) const { return servers_[static_cast<std::size_t>(sfc)].busy; }
  std::size_t waiting(SfcId sfc) const { return servers_[static_cast<std::size_t>(sfc)].waiting.size(); }
  const std::array<SfcSpec, kSfcCount>& specs() const { return specs_; }
  const std::array<std::vector<BusyInterval>, kSfcCount>& busy_log() const { return busy_log_; }

 private:
  struct Waiting {
    std::size_t index;
    FlowCategory category;
    double arrival;
  };

  struct Server {
    bool busy = false;
    Waiting current{};
    double start = 0.0;
    double completion = 0.0;
    std::vector<Waiting> waiting;
  };

  void start_next(std::size_t s, double at);
  void finish(std::size_t s);

  std::array<SfcSpec, kSfcCount> specs_;
  std::array<Server, kSfcCount> servers_{};
  std::array<std::vector<BusyInterval>, kSfcCount> busy_log_{};
  std::vector<FlowRecord> completed_;
  double clock_ = 0.0;
};

// ---------------------------------------------------------------------------
// Agent observation

inline constexpr std::size_t kSfcHistoryLength = 5;

struct FlowStamp {
  FlowCategory category = FlowCategory::kA;
  double arrival_time = 0.0;
};

/// Category and arrival time of the last five flows sent to each SFC, plus
/// the category of the flow awaiting a decision.
struct SfcState {
  std::array<std::vector<FlowStamp>, kSfcCount> history;  // newest first, <= 5 each
  FlowCategory incoming = FlowCategory::kA;
  double now = 0.0;
};

class SfcHistory {
 public:
  void record(SfcId sfc, FlowCategory category, double arrival_time);
  const std::array<std::deque<FlowStamp>, kSfcCount>& per_sfc() const { return per_sfc_; }

 private:
  std::array<std::deque<FlowStamp>, kSfcCount> per_sfc_{};
};

SfcState observe_state(const SfcHistory& history, FlowCategory incoming, double now);

/// Per SFC and history slot: category one-hot then min(gap / gap_scale, 1);
/// empty slots are all-zero one-hot with gap 1. The incoming category's
/// one-hot closes the vector.
std::vector<double> encode_state(const SfcState& state, double gap_scale = 0.1);

inline constexpr std::size_t kSfcStateDim = kSfcCount * kSfcHistoryLength * (kCategoryCount + 1) + kCategoryCount;

void write_flow_csv_header(std::ostream& os);
void write_flow_csv_row(std::ostream& os, const FlowRecord& f, double reward);

}  // namespace netslice
