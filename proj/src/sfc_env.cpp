#include "netslice/sfc_env.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "netslice/errors.hpp"
#include "netslice/format.hpp"

namespace netslice {

std::string_view to_string(SfcId id) {
  switch (id) {
    case SfcId::kI: return "I";
    case SfcId::kII: return "II";
    case SfcId::kIII: return "III";
  }
  return "?";
}

std::array<SfcSpec, kSfcCount> default_sfcs() {
  return {
      SfcSpec{SfcId::kI, 2.0, 0.010, {0, 1, 1}},
      SfcSpec{SfcId::kII, 1.5, 0.015, {0, 0, 1}},
      SfcSpec{SfcId::kIII, 1.0, 0.020, {0, 0, 0}},
  };
}

void validate(const SfcSpec& spec) {
  if (!(spec.cpu_cost > 0.0)) throw ConfigError("SFC cpu_cost must be positive");
  if (!(spec.processing_latency > 0.0)) throw ConfigError("SFC processing_latency must be positive");
}

void validate(const SfcRewardConfig& cfg) {
  const auto& w = cfg.category_weights;
  if (!(w[2] > 0.0) || !(w[1] >= w[2]) || !(w[0] >= w[1])) {
    throw ConfigError("category weights must satisfy A >= B >= C > 0");
  }
}

double flow_reward(const FlowRecord& flow, const SfcRewardConfig& cfg) {
  return -cfg.category_weights[static_cast<std::size_t>(flow.category)] * flow.sojourn();
}

double cpu_utilization(const std::array<std::vector<BusyInterval>, kSfcCount>& busy,
                       const std::array<SfcSpec, kSfcCount>& specs, double from, double to) {
  if (!(to > from)) throw ContractViolation("cpu_utilization: window must have positive length");
  double cpu_seconds = 0.0;
  for (std::size_t s = 0; s < kSfcCount; ++s) {
    for (const auto& iv : busy[s]) {
      const double overlap = std::min(iv.end, to) - std::max(iv.start, from);
      if (overlap > 0.0) cpu_seconds += specs[s].cpu_cost * overlap;
    }
  }
  return cpu_seconds / (to - from);
}

// ---------------------------------------------------------------------------

SfcSystem::SfcSystem(std::array<SfcSpec, kSfcCount> specs) : specs_(specs) {
  for (const auto& s : specs_) validate(s);
}

void SfcSystem::start_next(std::size_t s, double at) {
  Server& srv = servers_[s];
  if (srv.waiting.empty()) return;
  const auto& cls = specs_[s].priority_class;
  auto best = std::min_element(srv.waiting.begin(), srv.waiting.end(), [&](const Waiting& a, const Waiting& b) {
    const int ca = cls[static_cast<std::size_t>(a.category)];
    const int cb = cls[static_cast<std::size_t>(b.category)];
    if (ca != cb) return ca < cb;
    if (a.arrival != b.arrival) return a.arrival < b.arrival;
    return a.index < b.index;
  });
  srv.current = *best;
  srv.waiting.erase(best);
  srv.busy = true;
  srv.start = at;
  srv.completion = at + specs_[s].processing_latency;
}

void SfcSystem::finish(std::size_t s) {
  Server& srv = servers_[s];
  FlowRecord rec;
  rec.index = srv.current.index;
  rec.category = srv.current.category;
  rec.arrival_time = srv.current.arrival;
  rec.assigned_sfc = specs_[s].id;
  rec.start_time = srv.start;
  rec.completion_time = srv.completion;
  rec.queue_time = srv.start - srv.current.arrival;
  rec.processing_time = specs_[s].processing_latency;
  completed_.push_back(rec);
  busy_log_[s].push_back(BusyInterval{srv.start, srv.completion});
  srv.busy = false;
  const double t = srv.completion;
  start_next(s, t);
}

void SfcSystem::advance_to(double now) {
  if (now < clock_) throw ContractViolation("SFC clock cannot move backwards");
  for (std::size_t s = 0; s < kSfcCount; ++s) {
    while (servers_[s].busy && servers_[s].completion <= now) finish(s);
  }
  clock_ = now;
}

void SfcSystem::assign(std::size_t index, FlowCategory category, double arrival_time, SfcId sfc, double now) {
  const auto s = static_cast<std::size_t>(sfc);
  if (s >= kSfcCount) throw ContractViolation("unknown SFC id");
  if (arrival_time > now) throw ContractViolation("flow assigned before it arrived");
  advance_to(now);
  servers_[s].waiting.push_back(Waiting{index, category, arrival_time});
  if (!servers_[s].busy) start_next(s, now);
}

void SfcSystem::drain() {
  while (std::any_of(servers_.begin(), servers_.end(), [](const Server& s) { return s.busy; })) {
    double next = std::numeric_limits<double>::infinity();
    for (const auto& srv : servers_) {
      if (srv.busy) next = std::min(next, srv.completion);
    }
    advance_to(std::max(next, clock_));
  }
}

double SfcSystem::projected_sojourn(SfcId sfc, FlowCategory category) const {
  const auto s = static_cast<std::size_t>(sfc);
  const Server& srv = servers_[s];
  const auto& cls = specs_[s].priority_class;
  const int mine = cls[static_cast<std::size_t>(category)];
  double t = srv.busy ? srv.completion - clock_ : 0.0;
  for (const auto& w : srv.waiting) {
    if (cls[static_cast<std::size_t>(w.category)] <= mine) t += specs_[s].processing_latency;
  }
  return t + specs_[s].processing_latency;
}

std::vector<FlowRecord> SfcSystem::take_completed() {
  std::stable_sort(completed_.begin(), completed_.end(), [](const FlowRecord& a, const FlowRecord& b) {
    if (a.completion_time != b.completion_time) return a.completion_time < b.completion_time;
    return a.assigned_sfc < b.assigned_sfc;
  });
  std::vector<FlowRecord> out;
  out.swap(completed_);
  return out;
}

// ---------------------------------------------------------------------------

void SfcHistory::record(SfcId sfc, FlowCategory category, double arrival_time) {
  auto& h = per_sfc_[static_cast<std::size_t>(sfc)];
  h.push_front(FlowStamp{category, arrival_time});
  if (h.size() > kSfcHistoryLength) h.pop_back();
}

SfcState observe_state(const SfcHistory& history, FlowCategory incoming, double now) {
  SfcState st;
  st.incoming = incoming;
  st.now = now;
  for (std::size_t s = 0; s < kSfcCount; ++s) {
    st.history[s].assign(history.per_sfc()[s].begin(), history.per_sfc()[s].end());
  }
  return st;
}

std::vector<double> encode_state(const SfcState& state, double gap_scale) {
  if (!(gap_scale > 0.0)) throw ContractViolation("encode_state: gap_scale must be positive");
  std::vector<double> x;
  x.reserve(kSfcStateDim);
  for (std::size_t s = 0; s < kSfcCount; ++s) {
    const auto& h = state.history[s];
    for (std::size_t k = 0; k < kSfcHistoryLength; ++k) {
      if (k < h.size()) {
        for (std::size_t c = 0; c < kCategoryCount; ++c) {
          x.push_back(static_cast<std::size_t>(h[k].category) == c ? 1.0 : 0.0);
        }
        const double gap = std::max(0.0, state.now - h[k].arrival_time);
        x.push_back(std::min(gap / gap_scale, 1.0));
      } else {
        x.insert(x.end(), kCategoryCount, 0.0);
        x.push_back(1.0);
      }
    }
  }
  for (std::size_t c = 0; c < kCategoryCount; ++c) {
    x.push_back(static_cast<std::size_t>(state.incoming) == c ? 1.0 : 0.0);
  }
  return x;
}

void write_flow_csv_header(std::ostream& os) {
  os << "arrival_time_s,category,sfc,queue_time_s,processing_time_s,reward\n";
}

void write_flow_csv_row(std::ostream& os, const FlowRecord& f, double reward) {
  os << fmt_double(f.arrival_time) << ',' << to_string(f.category) << ',' << to_string(f.assigned_sfc) << ','
     << fmt_double(f.queue_time) << ',' << fmt_double(f.processing_time) << ',' << fmt_double(reward) << '\n';
}

}  // namespace netslice
