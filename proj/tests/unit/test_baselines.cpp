#include <doctest.h>

#include <cmath>

#include "netslice/baselines.hpp"
#include "netslice/errors.hpp"

using namespace netslice;

namespace {

// Largest remainder in grid units, picking one maximum at a time.
std::vector<long long> hamilton_units(const std::vector<double>& weights, long long units) {
  double sum = 0.0;
  for (double w : weights) sum += w;
  const std::size_t n = weights.size();
  std::vector<long double> quota(n);
  for (std::size_t i = 0; i < n; ++i) {
    quota[i] = sum == 0.0 ? static_cast<long double>(units) / n : static_cast<long double>(units) * weights[i] / sum;
  }
  std::vector<long long> out(n);
  std::vector<long double> rem(n);
  long long left = units;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = static_cast<long long>(std::floor(quota[i] + 1e-9L));
    rem[i] = quota[i] - out[i];
    left -= out[i];
  }
  std::vector<bool> used(n, false);
  while (left > 0) {
    std::size_t best = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (!used[i] && (best == n || rem[i] > rem[best])) best = i;
    }
    used[best] = true;
    ++out[best];
    --left;
  }
  return out;
}

void check_units(const BandwidthAllocation& a, const std::vector<long long>& units, double g) {
  REQUIRE(a.per_slice.size() == units.size());
  for (std::size_t i = 0; i < units.size(); ++i) {
    CHECK(a.per_slice[i] == doctest::Approx(static_cast<double>(units[i]) * g));
  }
}

}  // namespace

TEST_CASE("exponential smoothing predictor") {
  auto p = DemandPredictor::exponential_smoothing(0.5);
  CHECK(p.update(std::vector<double>{0.0, 10.0, 2.0}) == std::vector<double>{0.0, 10.0, 2.0});
  CHECK(p.update(std::vector<double>{4.0, 10.0, 0.0}) == std::vector<double>{2.0, 10.0, 1.0});
  CHECK(p.update(std::vector<double>{4.0, 10.0, 0.0}) == std::vector<double>{3.0, 10.0, 0.5});

  auto last = DemandPredictor::exponential_smoothing(1.0);
  last.update(std::vector<double>{5.0, 5.0});
  CHECK(predict_demand(last, std::vector<double>{7.0, 1.0}) == std::vector<double>{7.0, 1.0});

  auto constant = DemandPredictor::exponential_smoothing(0.3);
  std::vector<double> out;
  for (int i = 0; i < 10; ++i) out = constant.update(std::vector<double>{6.0});
  CHECK(out[0] == doctest::Approx(6.0));

  CHECK_THROWS_AS(DemandPredictor::exponential_smoothing(0.0), ConfigError);
  CHECK_THROWS_AS(DemandPredictor::exponential_smoothing(1.5), ConfigError);
  CHECK_THROWS_AS(p.update(std::vector<double>{-1.0, 0.0, 0.0}), ContractViolation);
}

TEST_CASE("sliding window predictor") {
  auto p = DemandPredictor::sliding_window(3);
  CHECK(p.update(std::vector<double>{3.0}) == std::vector<double>{3.0});
  CHECK(p.update(std::vector<double>{6.0}) == std::vector<double>{4.5});
  CHECK(p.update(std::vector<double>{9.0}) == std::vector<double>{6.0});
  CHECK(p.update(std::vector<double>{0.0}) == std::vector<double>{5.0});
  CHECK_THROWS_AS(DemandPredictor::sliding_window(0), ConfigError);
  CHECK_THROWS_AS(p.update(std::vector<double>{1.0, 2.0}), ContractViolation);
}

TEST_CASE("proportional demand allocation") {
  const auto a = dp_no_allocation(std::vector<double>{10.0, 30.0, 10.0}, 10e6, 1e5);
  CHECK(a.per_slice[0] == doctest::Approx(2e6));
  CHECK(a.per_slice[1] == doctest::Approx(6e6));
  CHECK(a.per_slice[2] == doctest::Approx(2e6));

  const auto zero = dp_no_allocation(std::vector<double>{0.0, 0.0, 0.0}, 10e6, 1e5);
  check_units(zero, hamilton_units({0.0, 0.0, 0.0}, 100), 1e5);
  CHECK(zero.total() == doctest::Approx(10e6));

  const auto third = dp_no_allocation(std::vector<double>{1.0, 1.0, 1.0}, 10e6, 1e5);
  check_units(third, {34, 33, 33}, 1e5);

  const auto one = dp_no_allocation(std::vector<double>{0.0, 5.0, 0.0}, 10e6, 1e5);
  check_units(one, {0, 100, 0}, 1e5);

  CHECK(proportional_shares(std::vector<double>{1.0, 3.0}, 8.0) == std::vector<double>{2.0, 6.0});
  CHECK_THROWS_AS(proportional_shares(std::vector<double>{}, 8.0), ContractViolation);
  CHECK_THROWS_AS(proportional_shares(std::vector<double>{-1.0, 2.0}, 8.0), ContractViolation);
}

TEST_CASE("rate-weighted demand allocation") {
  const RequiredRates rates;
  const std::vector<double> equal{1.0, 1.0, 1.0};
  const auto shares = proportional_shares(std::vector<double>{51e3, 5e6, 10e6}, 10e6);
  CHECK(shares[0] == doctest::Approx(10e6 * 51e3 / 15.051e6));
  CHECK(shares[1] == doctest::Approx(3.322e6).epsilon(1e-3));
  CHECK(shares[2] == doctest::Approx(6.644e6).epsilon(1e-3));
  const auto a = dp_bw_allocation(equal, rates, 10e6, 1e5);
  check_units(a, hamilton_units({51e3, 5e6, 10e6}, 100), 1e5);
  check_units(a, {0, 33, 67}, 1e5);

  RequiredRates same;
  same.rate = {1.0, 1.0, 1.0};
  const std::vector<double> demand{12.0, 40.0, 3.0};
  CHECK(dp_bw_allocation(demand, same, 10e6, 1e5) == dp_no_allocation(demand, 10e6, 1e5));
  CHECK_THROWS_AS(dp_bw_allocation(std::vector<double>{1.0, 2.0}, rates, 10e6, 1e5), ContractViolation);
}

TEST_CASE("rounding agrees with the largest-remainder oracle") {
  Rng rng = make_stream(42);
  for (int k = 0; k < 500; ++k) {
    const std::size_t n = 2 + static_cast<std::size_t>(uniform01(rng) * 5);
    std::vector<double> w(n);
    for (double& x : w) x = uniform01(rng) < 0.2 ? 0.0 : uniform01(rng) * 100.0;
    const auto shares = proportional_shares(w, 10e6);
    const auto a = round_to_granularity(shares, 10e6, 1e5);
    check_units(a, hamilton_units(w, 100), 1e5);
    CHECK(std::abs(a.total() - 10e6) <= 1e-9 * 10e6);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(a.per_slice[i] - shares[i]) < 1e5 + 1e-6);
  }
  CHECK_THROWS_AS(round_to_granularity(std::vector<double>{5e6, 5e6}, 10e6, 3e6), ConfigError);
}

TEST_CASE("hard slicing") {
  check_units(hard_slicing(10e6, 3, 1e5), {34, 33, 33}, 1e5);
  check_units(hard_slicing(9e6, 3, 1e5), {30, 30, 30}, 1e5);
  check_units(hard_slicing(10e6, 1, 1e5), {100}, 1e5);
  CHECK_THROWS_AS(hard_slicing(10e6, 0, 1e5), ConfigError);
}

TEST_CASE("no-priority assignment") {
  SfcSystem idle;
  CHECK(no_priority_assign(idle, FlowCategory::kA) == SfcId::kI);
  CHECK(no_priority_assign(idle, FlowCategory::kC) == SfcId::kI);

  // I busy with three waiting A flows; III idle.
  SfcSystem loaded;
  for (std::size_t i = 0; i < 4; ++i) loaded.assign(i, FlowCategory::kA, 0.0, SfcId::kI, 0.0);
  CHECK(loaded.projected_sojourn(SfcId::kI, FlowCategory::kA) == doctest::Approx(0.05));
  CHECK(no_priority_assign(loaded, FlowCategory::kA) == SfcId::kII);
  loaded.assign(4, FlowCategory::kA, 0.0, SfcId::kII, 0.0);
  CHECK(no_priority_assign(loaded, FlowCategory::kA) == SfcId::kIII);

  // At 10 ms: II has 5 ms left (5 + 15 = 20), III idle (20), I has a queue.
  SfcSystem tie;
  tie.assign(0, FlowCategory::kA, 0.0, SfcId::kII, 0.0);
  for (std::size_t i = 1; i < 4; ++i) tie.assign(i, FlowCategory::kA, 0.0, SfcId::kI, 0.0);
  tie.advance_to(0.01);
  CHECK(tie.projected_sojourn(SfcId::kII, FlowCategory::kB) == doctest::Approx(0.02));
  CHECK(tie.projected_sojourn(SfcId::kIII, FlowCategory::kB) == doctest::Approx(0.02));
  CHECK(no_priority_assign(tie, FlowCategory::kB) == SfcId::kIII);
}
