#include "netslice/radio_env.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "netslice/errors.hpp"
#include "netslice/format.hpp"

namespace netslice {

double BandwidthAllocation::total() const {
  return std::accumulate(per_slice.begin(), per_slice.end(), 0.0);
}

void check_allocation(const BandwidthAllocation& a, std::size_t slice_count, double total_bandwidth) {
  if (a.per_slice.size() != slice_count) {
    throw ContractViolation("allocation has " + std::to_string(a.per_slice.size()) + " entries, expected " +
                            std::to_string(slice_count));
  }
  for (double w : a.per_slice) {
    if (!(w >= 0.0)) throw ContractViolation("allocation entries must be nonnegative");
  }
  if (std::abs(a.total() - total_bandwidth) > 1e-9 * total_bandwidth) {
    throw ContractViolation("allocation sums to " + fmt_double(a.total()) + " Hz, expected " +
                            fmt_double(total_bandwidth));
  }
}

namespace {

std::size_t unit_count(double total, double granularity) {
  if (!(granularity > 0.0) || !(total > 0.0)) throw ConfigError("bandwidth and granularity must be positive");
  const double ratio = total / granularity;
  const double units = std::round(ratio);
  if (units < 1.0 || std::abs(units * granularity - total) > 1e-9 * total) {
    throw ConfigError("granularity " + fmt_double(granularity) + " does not divide total bandwidth " +
                      fmt_double(total));
  }
  return static_cast<std::size_t>(units);
}

void compose(std::size_t remaining, std::size_t slot, std::vector<std::size_t>& units,
             double granularity, std::vector<BandwidthAllocation>& out) {
  if (slot + 1 == units.size()) {
    units[slot] = remaining;
    BandwidthAllocation a;
    a.per_slice.reserve(units.size());
    for (std::size_t u : units) a.per_slice.push_back(static_cast<double>(u) * granularity);
    out.push_back(std::move(a));
    return;
  }
  for (std::size_t k = 0; k <= remaining; ++k) {
    units[slot] = k;
    compose(remaining - k, slot + 1, units, granularity, out);
  }
}

}  // namespace

std::vector<BandwidthAllocation> action_space(double total_bandwidth, double granularity,
                                              std::size_t slice_count) {
  if (slice_count == 0) throw ConfigError("action_space: slice_count must be >= 1");
  const std::size_t units = unit_count(total_bandwidth, granularity);
  std::vector<BandwidthAllocation> out;
  std::vector<std::size_t> parts(slice_count, 0);
  compose(units, 0, parts, granularity, out);
  return out;
}

void validate(const RewardConfig& cfg) {
  if (!(cfg.se_weight >= 0.0) || !(cfg.qoe_weight >= 0.0)) throw ConfigError("reward weights must be >= 0");
  if (cfg.se_weight == 0.0 && cfg.qoe_weight == 0.0) throw ConfigError("reward weights cannot both be zero");
}

bool packet_satisfied(const PacketCompletion& done, const SlaSpec& sla, SlaReading reading) {
  const double bits = done.size * 8.0;
  if (reading == SlaReading::kEndToEnd) {
    const double delay = done.finish_time - done.arrival_time;
    if (delay > sla.max_latency) return false;
    return delay <= 0.0 || bits / delay >= sla.min_rate;
  }
  const double wait = done.service_start - done.arrival_time;
  if (wait > sla.max_latency) return false;
  const double service = done.finish_time - done.service_start;
  return service <= 0.0 || bits / service >= sla.min_rate;
}

EpochMetrics compute_epoch_metrics(const EpochLog& log, const BandwidthAllocation& allocation,
                                   const RewardConfig& cfg, double total_bandwidth) {
  EpochMetrics m;
  m.allocated = allocation;
  double bits = 0.0;
  std::size_t arrived = 0;
  std::size_t satisfied = 0;
  double ratio_sum = 0.0;
  for (std::size_t s = 0; s < kSliceCount; ++s) {
    const auto& sl = log.slices[s];
    bits += sl.delivered_bits;
    arrived += sl.arrivals;
    satisfied += sl.satisfied;
    m.qoe_per_slice[s] =
        sl.arrivals == 0 ? 1.0
                         : std::min(1.0, static_cast<double>(sl.satisfied) / static_cast<double>(sl.arrivals));
    ratio_sum += m.qoe_per_slice[s];
  }
  m.se = bits / (log.duration * total_bandwidth);
  if (cfg.aggregation == QoeAggregation::kPooled) {
    m.qoe_aggregate =
        arrived == 0 ? 1.0 : std::min(1.0, static_cast<double>(satisfied) / static_cast<double>(arrived));
  } else {
    m.qoe_aggregate = ratio_sum / static_cast<double>(kSliceCount);
  }
  m.reward = cfg.se_weight * m.se + cfg.qoe_weight * m.qoe_aggregate;
  return m;
}

namespace {

template <typename IsBacklogged>
std::optional<std::size_t> next_backlogged(std::size_t ring_size, std::size_t cursor, IsBacklogged&& backlogged) {
  for (std::size_t i = 0; i < ring_size; ++i) {
    const std::size_t pos = (cursor + i) % ring_size;
    if (backlogged(pos)) return pos;
  }
  return std::nullopt;
}

}  // namespace

SlotSchedule schedule_slot(std::span<const bool> backlogged, double slice_bandwidth, std::size_t cursor) {
  SlotSchedule out{std::nullopt, cursor};
  if (backlogged.empty() || !(slice_bandwidth > 0.0)) return out;
  const auto pos = next_backlogged(backlogged.size(), cursor % backlogged.size(),
                                   [&](std::size_t p) { return backlogged[p]; });
  if (!pos) return out;
  out.grant = SlotGrant{*pos, slice_bandwidth};
  out.cursor = (*pos + 1) % backlogged.size();
  return out;
}

void validate(const RadioEnvConfig& cfg) {
  validate(cfg.link);
  validate(cfg.reward);
  if (!(cfg.total_bandwidth > 0.0)) throw ConfigError("total_bandwidth must be positive");
  if (!(cfg.epoch_duration > 0.0)) throw ConfigError("epoch_duration must be positive");
  const double slots = cfg.epoch_duration / cfg.link.slot_duration;
  if (std::abs(slots - std::round(slots)) > 1e-9 * slots) {
    throw ConfigError("epoch_duration must be a whole number of slots");
  }
}

RadioEnv::RadioEnv(RadioEnvConfig cfg, std::vector<UserLink> links, std::vector<SliceId> user_slice,
                   std::array<SlaSpec, kSliceCount> slas, std::uint64_t fading_seed)
    : cfg_(std::move(cfg)),
      links_(std::move(links)),
      user_slice_(std::move(user_slice)),
      slas_(slas),
      fading_rng_(make_stream(fading_seed, {0x66616465ULL})) {
  validate(cfg_);
  if (links_.size() != user_slice_.size()) throw ConfigError("links and user_slice sizes differ");
  slots_per_epoch_ = static_cast<std::size_t>(std::llround(cfg_.epoch_duration / cfg_.link.slot_duration));
  queues_.resize(links_.size());
  if (cfg_.pooled_scheduling) {
    rings_.resize(1);
    for (std::uint32_t u = 0; u < links_.size(); ++u) rings_[0].members.push_back(u);
  } else {
    rings_.resize(kSliceCount);
    for (std::uint32_t u = 0; u < links_.size(); ++u) {
      rings_[static_cast<std::size_t>(user_slice_[u])].members.push_back(u);
    }
  }
}

std::size_t RadioEnv::queued_packets() const {
  std::size_t n = pending_.size();
  for (const auto& q : queues_) n += q.size();
  return n;
}

void RadioEnv::purge_expired(std::uint32_t user, double now, EpochLog& log) {
  if (!cfg_.drop_after_deadline) return;
  auto& q = queues_[user];
  const std::size_t s = static_cast<std::size_t>(user_slice_[user]);
  const double limit = slas_[s].max_latency;
  // Under the service-start reading a packet already on the air is kept.
  auto first = q.begin();
  if (cfg_.sla_reading == SlaReading::kServiceStart && first != q.end() && first->service_start >= 0.0) ++first;
  auto last = first;
  while (last != q.end() && now - last->arrival > limit) ++last;
  log.slices[s].dropped += static_cast<std::size_t>(last - first);
  q.erase(first, last);
}

void RadioEnv::serve(std::uint32_t user, double bandwidth, double slot_start, EpochLog& log) {
  const double gain = draw_fading(cfg_.link, fading_rng_);
  const double rate = achievable_rate(bandwidth, links_[user], gain, cfg_.link);
  if (!(rate > 0.0)) return;
  auto& q = queues_[user];
  const std::size_t s = static_cast<std::size_t>(user_slice_[user]);

  double backlog = 0.0;
  for (const auto& p : q) backlog += p.remaining;
  double capacity = rate * cfg_.link.slot_duration;
  log.capacity_check_bits += std::min(capacity, backlog);

  double clock = slot_start;
  while (capacity > 0.0 && !q.empty()) {
    Queued& p = q.front();
    if (p.service_start < 0.0) p.service_start = clock;
    const double sent = std::min(capacity, p.remaining);
    capacity -= sent;
    clock += sent / rate;
    log.slices[s].delivered_bits += sent;
    if (sent >= p.remaining) {
      const PacketCompletion done{p.arrival, p.service_start, clock, p.size, user, user_slice_[user]};
      ++log.slices[s].completed;
      if (packet_satisfied(done, slas_[s], cfg_.sla_reading)) ++log.slices[s].satisfied;
      q.pop_front();
    } else {
      p.remaining -= sent;
    }
  }
}

RadioStep RadioEnv::step(const BandwidthAllocation& allocation, std::span<const PacketEvent> events) {
  check_allocation(allocation, kSliceCount, cfg_.total_bandwidth);
  const double t0 = epoch_start();
  const double t1 = t0 + cfg_.epoch_duration;

  RadioStep out;
  out.log.duration = cfg_.epoch_duration;
  for (const auto& e : events) {
    if (e.arrival_time < t0 || e.arrival_time >= t1) {
      throw ContractViolation("packet event outside the current epoch window");
    }
    if (!pending_.empty() && e.arrival_time < pending_.back().arrival_time) {
      throw ContractViolation("packet events must be sorted by arrival time");
    }
    ++out.state.arrived_packets[static_cast<std::size_t>(e.slice_id)];
    ++out.log.slices[static_cast<std::size_t>(e.slice_id)].arrivals;
    pending_.push_back(e);
  }

  std::vector<double> ring_bandwidth;
  if (cfg_.pooled_scheduling) {
    ring_bandwidth.assign(1, cfg_.total_bandwidth);
  } else {
    ring_bandwidth = allocation.per_slice;
  }

  for (std::size_t k = 0; k < slots_per_epoch_; ++k) {
    const double now = t0 + static_cast<double>(k) * cfg_.link.slot_duration;
    while (!pending_.empty() && pending_.front().arrival_time <= now) {
      const PacketEvent& e = pending_.front();
      queues_[e.user_id].push_back(Queued{e.arrival_time, e.size, e.size * 8.0, -1.0});
      pending_.pop_front();
    }
    for (std::size_t r = 0; r < rings_.size(); ++r) {
      Ring& ring = rings_[r];
      if (ring.members.empty()) continue;
      if (!(ring_bandwidth[r] > 0.0)) {
        for (std::uint32_t u : ring.members) purge_expired(u, now, out.log);
        continue;
      }
      const auto pos = next_backlogged(ring.members.size(), ring.cursor, [&](std::size_t p) {
        const std::uint32_t u = ring.members[p];
        purge_expired(u, now, out.log);
        return !queues_[u].empty();
      });
      if (!pos) continue;
      ring.cursor = (*pos + 1) % ring.members.size();
      serve(ring.members[*pos], ring_bandwidth[r], now, out.log);
    }
  }

  ++epoch_;
  out.metrics = compute_epoch_metrics(out.log, allocation, cfg_.reward, cfg_.total_bandwidth);
  return out;
}

void write_epoch_csv_header(std::ostream& os) {
  os << "epoch,w_volte_hz,w_video_hz,w_urllc_hz,se,qoe_volte,qoe_video,qoe_urllc,qoe_aggregate,reward\n";
}

void write_epoch_csv_row(std::ostream& os, std::size_t epoch, const EpochMetrics& m) {
  os << epoch;
  for (std::size_t s = 0; s < kSliceCount; ++s) {
    os << ',' << fmt_double(s < m.allocated.per_slice.size() ? m.allocated.per_slice[s] : 0.0);
  }
  os << ',' << fmt_double(m.se);
  for (double q : m.qoe_per_slice) os << ',' << fmt_double(q);
  os << ',' << fmt_double(m.qoe_aggregate) << ',' << fmt_double(m.reward) << '\n';
}

}  // namespace netslice
