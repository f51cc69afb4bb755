#include "netslice/traffic.hpp"

#include <algorithm>
#include <cstring>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

#include "netslice/errors.hpp"
#include "netslice/format.hpp"

namespace netslice {

std::string_view to_string(SliceId id) {
  switch (id) {
    case SliceId::kVoLTE: return "VoLTE";
    case SliceId::kVideo: return "Video";
    case SliceId::kUrllc: return "URLLC";
  }
  return "?";
}

std::string_view to_string(FlowCategory c) {
  switch (c) {
    case FlowCategory::kA: return "A";
    case FlowCategory::kB: return "B";
    case FlowCategory::kC: return "C";
  }
  return "?";
}

namespace {

[[noreturn]] void config_fail(const std::string& msg) { throw ConfigError(msg); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

void validate_pareto(double shape, double mean, double max, const char* what) {
  if (!(shape > 1.0)) config_fail(std::string(what) + ": Pareto shape must exceed 1");
  if (!(mean > 0.0)) config_fail(std::string(what) + ": mean must be positive");
  if (!(max > mean)) config_fail(std::string(what) + ": max must exceed mean");
}

}  // namespace

void validate(const InterArrivalModel& model) {
  std::visit(
      [](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, UniformGap>) {
          if (!(m.min >= 0.0)) config_fail("uniform gap: min must be >= 0");
          if (!(m.max > m.min)) config_fail("uniform gap: max must exceed min");
        } else if constexpr (std::is_same_v<T, TruncatedParetoGap>) {
          validate_pareto(m.shape, m.mean, m.max, "truncated Pareto gap");
        } else if constexpr (std::is_same_v<T, ExponentialGap>) {
          if (!(m.mean > 0.0)) config_fail("exponential gap: mean must be positive");
        } else {
          if (!std::isfinite(m.mu)) config_fail("lognormal gap: mu must be finite");
          if (!(m.sigma > 0.0)) config_fail("lognormal gap: sigma must be positive");
        }
      },
      model);
}

void validate(const PacketSizeModel& model) {
  std::visit(
      [](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ConstantSize>) {
          if (!(m.size > 0.0)) config_fail("constant size must be positive");
        } else if constexpr (std::is_same_v<T, TruncatedParetoSize>) {
          validate_pareto(m.shape, m.mean, m.max, "truncated Pareto size");
        } else {
          if (!(m.mean > 0.0)) config_fail("truncated lognormal size: mean must be positive");
          if (!(m.stddev > 0.0)) config_fail("truncated lognormal size: stddev must be positive");
          if (!(m.max > m.mean)) config_fail("truncated lognormal size: max must exceed mean");
        }
      },
      model);
}

void validate(const SliceConfig& slice) {
  validate(slice.inter_arrival);
  validate(slice.packet_size);
  if (!(slice.sla.min_rate > 0.0)) config_fail("SLA rate must be positive");
  if (!(slice.sla.max_latency > 0.0)) config_fail("SLA latency must be positive");
}

// ---------------------------------------------------------------------------

double truncated_pareto_mean(double shape, double scale, double max) {
  const double a = shape;
  const double tail = std::pow(scale / max, a);
  const double norm = a * std::pow(scale, a) / (1.0 - tail);
  if (a == 1.0) return norm * std::log(max / scale);
  return norm * (std::pow(max, 1.0 - a) - std::pow(scale, 1.0 - a)) / (1.0 - a);
}

double solve_truncated_pareto_scale(double shape, double mean, double max) {
  validate_pareto(shape, mean, max, "truncated Pareto");
  // The truncated mean rises monotonically from 0 to max as the scale does.
  double lo = max * 1e-12;
  double hi = max * (1.0 - 1e-12);
  for (int i = 0; i < 200 && hi - lo > 1e-15 * max; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (truncated_pareto_mean(shape, mid, max) < mean) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

std::array<double, 2> truncated_lognormal_moments(LognormalParams p, double max) {
  const double a = (std::log(max) - p.mu) / p.sigma;
  const double mass = normal_cdf(a);
  const double m1 = std::exp(p.mu + 0.5 * p.sigma * p.sigma) * normal_cdf(a - p.sigma) / mass;
  const double m2 = std::exp(2.0 * p.mu + 2.0 * p.sigma * p.sigma) * normal_cdf(a - 2.0 * p.sigma) / mass;
  return {m1, std::sqrt(std::max(0.0, m2 - m1 * m1))};
}

LognormalParams solve_truncated_lognormal(double mean, double stddev, double max) {
  validate(PacketSizeModel{TruncatedLognormalSize{mean, stddev, max}});
  // Fixed point on the untruncated target moments: shift them by the residual
  // of the truncated moments until both match.
  double m = mean;
  double s = stddev;
  LognormalParams p{};
  for (int iter = 0; iter < 500; ++iter) {
    const double var_log = std::log1p((s / m) * (s / m));
    p.sigma = std::sqrt(var_log);
    p.mu = std::log(m) - 0.5 * var_log;
    const auto [tm, ts] = truncated_lognormal_moments(p, max);
    const double em = mean - tm;
    const double es = stddev - ts;
    if (std::abs(em) < 1e-13 * mean && std::abs(es) < 1e-13 * stddev) return p;
    m += em;
    s += es;
    if (!(m > 0.0) || !(s > 0.0)) break;
  }
  config_fail("truncated lognormal: no parameters reproduce the requested mean/stddev under the cap");
}

double sample_truncated_pareto(double shape, double scale, double max, Rng& rng) {
  const double keep = 1.0 - std::pow(scale / max, shape);
  const double u = uniform01(rng);
  const double x = scale * std::pow(1.0 - u * keep, -1.0 / shape);
  return std::min(x, max);
}

double sample_standard_normal(Rng& rng) {
  const double u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// ---------------------------------------------------------------------------

InterArrivalSampler::InterArrivalSampler(const InterArrivalModel& model) : model_(model) {
  validate(model_);
  if (const auto* p = std::get_if<TruncatedParetoGap>(&model_)) {
    pareto_scale_ = solve_truncated_pareto_scale(p->shape, p->mean, p->max);
  }
}

double InterArrivalSampler::operator()(Rng& rng) const {
  return std::visit(
      [&](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, UniformGap>) {
          return m.min + (m.max - m.min) * uniform01(rng);
        } else if constexpr (std::is_same_v<T, TruncatedParetoGap>) {
          return sample_truncated_pareto(m.shape, pareto_scale_, m.max, rng);
        } else if constexpr (std::is_same_v<T, ExponentialGap>) {
          return -m.mean * std::log1p(-uniform01(rng));
        } else {
          return std::exp(m.mu + m.sigma * sample_standard_normal(rng));
        }
      },
      model_);
}

PacketSizeSampler::PacketSizeSampler(const PacketSizeModel& model) : model_(model) {
  validate(model_);
  if (const auto* p = std::get_if<TruncatedParetoSize>(&model_)) {
    pareto_scale_ = solve_truncated_pareto_scale(p->shape, p->mean, p->max);
  } else if (const auto* l = std::get_if<TruncatedLognormalSize>(&model_)) {
    lognormal_ = solve_truncated_lognormal(l->mean, l->stddev, l->max);
  }
}

double PacketSizeSampler::operator()(Rng& rng) const {
  return std::visit(
      [&](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ConstantSize>) {
          return m.size;
        } else if constexpr (std::is_same_v<T, TruncatedParetoSize>) {
          return sample_truncated_pareto(m.shape, pareto_scale_, m.max, rng);
        } else {
          for (;;) {
            const double x = std::exp(lognormal_.mu + lognormal_.sigma * sample_standard_normal(rng));
            if (x <= m.max) return x;
          }
        }
      },
      model_);
}

double sample_inter_arrival(const InterArrivalModel& model, Rng& rng) {
  return InterArrivalSampler(model)(rng);
}

double sample_packet_size(const PacketSizeModel& model, Rng& rng) {
  return PacketSizeSampler(model)(rng);
}

// ---------------------------------------------------------------------------

std::vector<SliceConfig> default_slices(std::size_t volte_users, std::size_t video_users,
                                        std::size_t urllc_users) {
  constexpr double kMB = 1e6;
  return {
      SliceConfig{SliceId::kVoLTE, volte_users, UniformGap{0.0, 0.160}, ConstantSize{40.0},
                  SlaSpec{51e3, 0.010}},
      SliceConfig{SliceId::kVideo, video_users, TruncatedParetoGap{1.2, 0.006, 0.0125},
                  TruncatedParetoSize{1.2, 100.0, 250.0}, SlaSpec{5e6, 0.010}},
      SliceConfig{SliceId::kUrllc, urllc_users, ExponentialGap{0.180},
                  TruncatedLognormalSize{2.0 * kMB, 0.722 * kMB, 5.0 * kMB}, SlaSpec{10e6, 0.005}},
  };
}

PacketSource::PacketSource(std::vector<SliceConfig> slices, std::uint64_t seed)
    : slices_(std::move(slices)) {
  std::uint32_t next_user = 0;
  for (std::size_t s = 0; s < slices_.size(); ++s) {
    validate(slices_[s]);
    gap_samplers_.emplace_back(slices_[s].inter_arrival);
    size_samplers_.emplace_back(slices_[s].packet_size);
    for (std::size_t u = 0; u < slices_[s].user_count; ++u, ++next_user) {
      UserStream stream{slices_[s].slice_id, s, make_stream(seed, {0x7472616666ULL, next_user}), 0.0};
      stream.next_arrival = gap_samplers_[s](stream.rng);
      users_.push_back(std::move(stream));
    }
  }
}

void PacketSource::next_window(double from, double to, std::vector<PacketEvent>& out) {
  (void)from;
  scratch_.clear();
  for (std::uint32_t id = 0; id < users_.size(); ++id) {
    UserStream& u = users_[id];
    while (u.next_arrival < to) {
      const double size = size_samplers_[u.slice_index](u.rng);
      scratch_.push_back(PacketEvent{u.next_arrival, id, u.slice, size});
      u.next_arrival += gap_samplers_[u.slice_index](u.rng);
    }
  }
  std::sort(scratch_.begin(), scratch_.end(), [](const PacketEvent& a, const PacketEvent& b) {
    return a.arrival_time != b.arrival_time ? a.arrival_time < b.arrival_time : a.user_id < b.user_id;
  });
  out.insert(out.end(), scratch_.begin(), scratch_.end());
}

PacketTrace generate_packet_trace(const std::vector<SliceConfig>& slices, double horizon,
                                  std::uint64_t seed) {
  if (!(horizon > 0.0)) throw ConfigError("trace horizon must be positive");
  PacketSource source(slices, seed);
  PacketTrace trace;
  source.next_window(0.0, horizon, trace.events);
  return trace;
}

namespace {

constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

std::uint64_t fnv_mix(std::uint64_t h, std::uint64_t word) {
  for (int i = 0; i < 8; ++i) {
    h ^= (word >> (8 * i)) & 0xffU;
    h *= kFnvPrime;
  }
  return h;
}

std::uint64_t bits_of(double x) {
  std::uint64_t b;
  std::memcpy(&b, &x, sizeof b);
  return b;
}

}  // namespace

std::uint64_t trace_checksum(std::span<const PacketEvent> events, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (const auto& e : events) {
    h = fnv_mix(h, bits_of(e.arrival_time));
    h = fnv_mix(h, e.user_id);
    h = fnv_mix(h, static_cast<std::uint64_t>(e.slice_id));
    h = fnv_mix(h, bits_of(e.size));
  }
  return h;
}

std::uint64_t trace_checksum(std::span<const FlowEvent> events, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (const auto& e : events) {
    h = fnv_mix(h, bits_of(e.arrival_time));
    h = fnv_mix(h, static_cast<std::uint64_t>(e.category));
  }
  return h;
}

void write_packet_trace_csv(std::ostream& os, const PacketTrace& trace) {
  os << "arrival_time_s,user_id,slice,size_bytes\n";
  for (const auto& e : trace.events) {
    os << fmt_double(e.arrival_time) << ',' << e.user_id << ',' << to_string(e.slice_id) << ','
       << fmt_double(e.size) << '\n';
  }
}

// ---------------------------------------------------------------------------

FlowRates default_flow_rates() {
  const LognormalGap g{std::log(0.02), 0.5};
  return {g, g, g};
}

FlowTrace generate_flow_trace(const FlowRates& rates, std::size_t count, std::uint64_t seed) {
  if (count == 0) throw ConfigError("flow count must be positive");
  std::array<InterArrivalSampler, kCategoryCount> samplers{
      InterArrivalSampler(rates[0]), InterArrivalSampler(rates[1]), InterArrivalSampler(rates[2])};
  std::array<Rng, kCategoryCount> streams{make_stream(seed, {0x666c6f77ULL, 0}),
                                          make_stream(seed, {0x666c6f77ULL, 1}),
                                          make_stream(seed, {0x666c6f77ULL, 2})};
  std::array<double, kCategoryCount> next{};
  for (std::size_t c = 0; c < kCategoryCount; ++c) next[c] = samplers[c](streams[c]);

  FlowTrace trace;
  trace.events.reserve(count);
  while (trace.events.size() < count) {
    const std::size_t c = static_cast<std::size_t>(std::min_element(next.begin(), next.end()) - next.begin());
    trace.events.push_back(FlowEvent{next[c], static_cast<FlowCategory>(c)});
    next[c] += samplers[c](streams[c]);
  }
  return trace;
}

void write_flow_trace_csv(std::ostream& os, const FlowTrace& trace) {
  os << "arrival_time_s,category\n";
  for (const auto& e : trace.events) os << fmt_double(e.arrival_time) << ',' << to_string(e.category) << '\n';
}

std::vector<double> place_users(std::size_t count, double radius, double min_distance, Rng& rng) {
  if (!(radius > 0.0)) throw ConfigError("placement radius must be positive");
  std::vector<double> d(count);
  for (auto& x : d) x = std::max(min_distance, radius * std::sqrt(uniform01(rng)));
  return d;
}

}  // namespace netslice
