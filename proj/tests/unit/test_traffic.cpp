#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "netslice/errors.hpp"
#include "netslice/traffic.hpp"

using namespace netslice;

namespace {

// Composite Simpson rule with n (even) panels.
template <typename F>
double simpson(F f, double a, double b, int n = 20000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// Truncated Pareto mean by quadrature in log space.
double pareto_mean_quadrature(double shape, double scale, double max) {
  auto pdf_y = [&](double y) {  // density of log X times Jacobian
    const double x = std::exp(y);
    return shape * std::pow(scale, shape) / std::pow(x, shape + 1.0) * x;
  };
  const double mass = simpson(pdf_y, std::log(scale), std::log(max));
  const double first = simpson([&](double y) { return std::exp(y) * pdf_y(y); }, std::log(scale), std::log(max));
  return first / mass;
}

std::array<double, 2> lognormal_moments_quadrature(double mu, double sigma, double max) {
  auto phi = [&](double y) {
    const double z = (y - mu) / sigma;
    return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * M_PI));
  };
  const double lo = mu - 12.0 * sigma;
  const double hi = std::log(max);
  const double mass = simpson(phi, lo, hi);
  const double m1 = simpson([&](double y) { return std::exp(y) * phi(y); }, lo, hi) / mass;
  const double m2 = simpson([&](double y) { return std::exp(2.0 * y) * phi(y); }, lo, hi) / mass;
  return {m1, std::sqrt(m2 - m1 * m1)};
}

template <typename Draw>
std::pair<double, double> mean_and_max(std::size_t n, Draw draw) {
  double sum = 0.0;
  double hi = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = draw();
    sum += x;
    hi = std::max(hi, x);
  }
  return {sum / static_cast<double>(n), hi};
}

}  // namespace

TEST_CASE("truncated Pareto scale reproduces the truncated mean") {
  for (auto [shape, mean, max] : {std::array<double, 3>{1.2, 0.006, 0.0125}, {1.2, 100.0, 250.0}, {2.5, 3.0, 10.0}}) {
    const double scale = solve_truncated_pareto_scale(shape, mean, max);
    CHECK(scale > 0.0);
    CHECK(scale < mean);
    CHECK(truncated_pareto_mean(shape, scale, max) == doctest::Approx(mean).epsilon(1e-9));
    CHECK(pareto_mean_quadrature(shape, scale, max) == doctest::Approx(mean).epsilon(1e-6));
  }
}

TEST_CASE("truncated Pareto with an unreachable mean is a configuration error") {
  CHECK_THROWS_AS(solve_truncated_pareto_scale(1.2, 300.0, 250.0), ConfigError);
  CHECK_THROWS_AS(validate(PacketSizeModel{TruncatedParetoSize{0.9, 100.0, 250.0}}), ConfigError);
}

TEST_CASE("truncated lognormal parameters match the target moments") {
  const auto p = solve_truncated_lognormal(2e6, 0.722e6, 5e6);
  const auto closed = truncated_lognormal_moments(p, 5e6);
  CHECK(closed[0] == doctest::Approx(2e6).epsilon(1e-6));
  CHECK(closed[1] == doctest::Approx(0.722e6).epsilon(1e-6));
  const auto quad = lognormal_moments_quadrature(p.mu, p.sigma, 5e6);
  CHECK(quad[0] == doctest::Approx(2e6).epsilon(1e-5));
  CHECK(quad[1] == doctest::Approx(0.722e6).epsilon(1e-5));
}

TEST_CASE("uniform gaps stay in range with the midpoint mean") {
  Rng rng = make_stream(11);
  const InterArrivalModel m = UniformGap{0.0, 0.160};
  const auto [mean, hi] = mean_and_max(400000, [&] { return sample_inter_arrival(m, rng); });
  CHECK(hi <= 0.160);
  CHECK(mean == doctest::Approx(0.080).epsilon(0.01));
}

TEST_CASE("exponential gaps have the configured mean") {
  Rng rng = make_stream(12);
  const InterArrivalSampler s(ExponentialGap{0.180});
  const auto [mean, hi] = mean_and_max(400000, [&] { return s(rng); });
  CHECK(mean == doctest::Approx(0.180).epsilon(0.01));
  CHECK(hi > 0.0);
}

TEST_CASE("truncated samplers never exceed their maximum") {
  Rng rng = make_stream(13);
  const InterArrivalSampler gap(TruncatedParetoGap{1.2, 0.006, 0.0125});
  const PacketSizeSampler video(TruncatedParetoSize{1.2, 100.0, 250.0});
  const PacketSizeSampler urllc(TruncatedLognormalSize{2e6, 0.722e6, 5e6});
  const auto g = mean_and_max(300000, [&] { return gap(rng); });
  const auto v = mean_and_max(300000, [&] { return video(rng); });
  const auto u = mean_and_max(300000, [&] { return urllc(rng); });
  CHECK(g.second <= 0.0125);
  CHECK(v.second <= 250.0);
  CHECK(u.second <= 5e6);
  CHECK(g.first == doctest::Approx(0.006).epsilon(0.02));
  CHECK(v.first == doctest::Approx(100.0).epsilon(0.02));
  CHECK(u.first == doctest::Approx(2e6).epsilon(0.02));
}

TEST_CASE("constant packet size") {
  Rng rng = make_stream(14);
  for (int i = 0; i < 100; ++i) CHECK(sample_packet_size(ConstantSize{40.0}, rng) == 40.0);
}

TEST_CASE("invalid models are rejected") {
  CHECK_THROWS_AS(validate(InterArrivalModel{UniformGap{0.2, 0.1}}), ConfigError);
  CHECK_THROWS_AS(validate(InterArrivalModel{UniformGap{-0.1, 0.1}}), ConfigError);
  CHECK_THROWS_AS(validate(InterArrivalModel{ExponentialGap{0.0}}), ConfigError);
  CHECK_THROWS_AS(validate(InterArrivalModel{LognormalGap{0.0, 0.0}}), ConfigError);
  CHECK_THROWS_AS(validate(PacketSizeModel{ConstantSize{0.0}}), ConfigError);
  CHECK_THROWS_AS(validate(PacketSizeModel{TruncatedLognormalSize{2e6, -1.0, 5e6}}), ConfigError);
  Rng rng = make_stream(1);
  CHECK_THROWS_AS(sample_inter_arrival(ExponentialGap{-1.0}, rng), ConfigError);
}

TEST_CASE("reference slices") {
  const auto s = default_slices();
  REQUIRE(s.size() == 3);
  CHECK(s[0].user_count + s[1].user_count + s[2].user_count == 100);
  CHECK(s[0].user_count == 46);
  CHECK(s[2].user_count == 8);
  CHECK(std::get<UniformGap>(s[0].inter_arrival).max == doctest::Approx(0.160));
  CHECK(std::get<ConstantSize>(s[0].packet_size).size == 40.0);
  CHECK(std::get<TruncatedParetoGap>(s[1].inter_arrival).max == doctest::Approx(0.0125));
  CHECK(std::get<TruncatedParetoSize>(s[1].packet_size).mean == doctest::Approx(100.0));
  CHECK(std::get<ExponentialGap>(s[2].inter_arrival).mean == doctest::Approx(0.180));
  CHECK(std::get<TruncatedLognormalSize>(s[2].packet_size).stddev == doctest::Approx(0.722e6));
  CHECK(s[0].sla.min_rate == 51e3);
  CHECK(s[1].sla.min_rate == 5e6);
  CHECK(s[2].sla.min_rate == 10e6);
  CHECK(s[0].sla.max_latency == doctest::Approx(0.010));
  CHECK(s[2].sla.max_latency == doctest::Approx(0.005));
}

TEST_CASE("one VoLTE user over 1.6 s averages 20 arrivals") {
  const auto slices = default_slices(1, 0, 0);
  double total = 0.0;
  const int runs = 2000;
  for (int seed = 0; seed < runs; ++seed) {
    total += static_cast<double>(generate_packet_trace(slices, 1.6, static_cast<std::uint64_t>(seed)).events.size());
  }
  // Renewal count with a uniform(0, 160 ms) gap: E[N(t)] ~ t/m + (var - m^2) / (2 m^2) = 20 - 1/3.
  CHECK(total / runs == doctest::Approx(20.0 - 1.0 / 3.0).epsilon(0.02));
}

TEST_CASE("zero users give an empty trace") {
  CHECK(generate_packet_trace(default_slices(0, 0, 0), 5.0, 3).events.empty());
}

TEST_CASE("packet traces are deterministic, sorted and bounded") {
  const auto slices = default_slices(5, 5, 2);
  const auto a = generate_packet_trace(slices, 3.0, 42);
  const auto b = generate_packet_trace(slices, 3.0, 42);
  const auto c = generate_packet_trace(slices, 3.0, 43);
  CHECK(a.events == b.events);
  CHECK(trace_checksum(a.events) == trace_checksum(b.events));
  CHECK(trace_checksum(a.events) != trace_checksum(c.events));
  CHECK(std::is_sorted(a.events.begin(), a.events.end(),
                       [](const PacketEvent& x, const PacketEvent& y) { return x.arrival_time < y.arrival_time; }));
  for (const auto& e : a.events) {
    CHECK(e.arrival_time >= 0.0);
    CHECK(e.arrival_time < 3.0);
    if (e.slice_id == SliceId::kVoLTE) CHECK(e.size == 40.0);
    if (e.slice_id == SliceId::kVideo) CHECK(e.size <= 250.0);
    if (e.slice_id == SliceId::kUrllc) CHECK(e.size <= 5e6);
    CHECK(e.size > 0.0);
  }
  CHECK_THROWS_AS(generate_packet_trace(slices, 0.0, 1), ConfigError);
}

TEST_CASE("windowed generation matches one-shot generation") {
  const auto slices = default_slices(4, 4, 1);
  const auto whole = generate_packet_trace(slices, 2.0, 9);
  PacketSource source(slices, 9);
  std::vector<PacketEvent> pieces;
  const std::vector<double> cuts{0.0, 0.013, 0.5, 0.5005, 1.2, 1.7, 2.0};
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) source.next_window(cuts[i], cuts[i + 1], pieces);
  CHECK(pieces == whole.events);
  // Merged count equals the sum of per-user counts.
  std::vector<std::size_t> per_user(source.user_count(), 0);
  for (const auto& e : whole.events) ++per_user[e.user_id];
  CHECK(std::accumulate(per_user.begin(), per_user.end(), std::size_t{0}) == whole.events.size());
}

TEST_CASE("flow traces") {
  const auto rates = default_flow_rates();
  const auto t = generate_flow_trace(rates, 10000, 5);
  CHECK(t.events.size() == 10000);
  CHECK(std::is_sorted(t.events.begin(), t.events.end(),
                       [](const FlowEvent& x, const FlowEvent& y) { return x.arrival_time < y.arrival_time; }));
  CHECK(generate_flow_trace(rates, 10000, 5).events == t.events);

  const auto one = generate_flow_trace(rates, 1, 5);
  REQUIRE(one.events.size() == 1);
  CHECK(one.events[0].arrival_time > 0.0);
  CHECK_THROWS_AS(generate_flow_trace(rates, 0, 5), ConfigError);
}

TEST_CASE("equal category rates split flows evenly") {
  const auto t = generate_flow_trace(default_flow_rates(), 30000, 8);
  std::array<double, 3> n{};
  for (const auto& e : t.events) n[static_cast<std::size_t>(e.category)] += 1.0;
  const double sd = std::sqrt(30000.0 * (1.0 / 3.0) * (2.0 / 3.0));
  for (double c : n) CHECK(std::abs(c - 10000.0) < 3.0 * sd);
  // Mean gap per category: exp(mu + sigma^2 / 2).
  const double expected_gap = 0.02 * std::exp(0.125);
  CHECK(t.events.back().arrival_time / 10000.0 == doctest::Approx(expected_gap).epsilon(0.03));
}

TEST_CASE("CSV serialization") {
  std::ostringstream os;
  PacketTrace t;
  t.events.push_back(PacketEvent{0.25, 3, SliceId::kVideo, 120.0});
  write_packet_trace_csv(os, t);
  CHECK(os.str() == "arrival_time_s,user_id,slice,size_bytes\n0.25,3,Video,120\n");
  std::ostringstream fs;
  FlowTrace f;
  f.events.push_back(FlowEvent{0.5, FlowCategory::kB});
  write_flow_trace_csv(fs, f);
  CHECK(fs.str() == "arrival_time_s,category\n0.5,B\n");
}

TEST_CASE("uniform disc placement") {
  Rng rng = make_stream(21);
  const auto d = place_users(200000, 40.0, 1.0, rng);
  double inner = 0.0;
  for (double x : d) {
    CHECK(x >= 1.0);
    CHECK(x <= 40.0);
    if (x <= 20.0) inner += 1.0;
  }
  // Area fraction of the inner half-radius disc.
  CHECK(inner / 200000.0 == doctest::Approx(0.25).epsilon(0.02));
}
