#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "netslice/errors.hpp"
#include "netslice/experiment.hpp"

using namespace netslice;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("netslice_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t line_count(const fs::path& p) {
  const std::string s = slurp(p);
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

ExperimentConfig small_radio(Scheme scheme) {
  auto cfg = default_config(Scenario::kRadio, scheme);
  cfg.radio.volte_users = 3;
  cfg.radio.video_users = 3;
  cfg.radio.urllc_users = 1;
  cfg.radio.eval_epochs = 4;
  return cfg;
}

ExperimentConfig small_dql() {
  auto cfg = small_radio(Scheme::kDql);
  cfg.radio.training_updates = 20;
  cfg.radio.normalization.calibration = 10;
  cfg.agent.batch_size = 4;
  cfg.agent.hidden = {16};
  cfg.agent.epsilon_decay_steps = 10;
  return cfg;
}

}  // namespace

TEST_CASE("reward normalizer freezes median and MAD") {
  RewardNormalizer n(RewardNormalization{5, 10.0});
  CHECK_FALSE(n.calibrated());
  CHECK_THROWS_AS(n(1.0), ContractViolation);
  const double raw[] = {1.0, 2.0, 3.0, 4.0, 100.0};
  for (int i = 0; i < 4; ++i) CHECK_FALSE(n.observe(raw[i]));
  CHECK(n.observe(raw[4]));
  CHECK(n.calibrated());
  // Median 3, absolute deviations {2, 1, 0, 1, 97} have median 1.
  CHECK(n.offset() == 3.0);
  CHECK(n.scale() == doctest::Approx(1.4826));
  CHECK(n(3.0 + 1.4826) == doctest::Approx(1.0));
  CHECK(n(1e6) == 10.0);
  CHECK(n(-1e6) == -10.0);
  CHECK_FALSE(n.observe(7.0));
  CHECK(n.offset() == 3.0);

  RewardNormalizer flat(RewardNormalization{3, 10.0});
  flat.observe(5.0);
  flat.observe(5.0);
  flat.observe(5.0);
  CHECK(flat.scale() > 0.0);
  CHECK(flat(5.0) == 0.0);
  CHECK_THROWS_AS(RewardNormalizer(RewardNormalization{0, 10.0}), ConfigError);
}

TEST_CASE("seed derivation") {
  CHECK(derive_seed(1, 7) == derive_seed(1, 7));
  CHECK(derive_seed(1, 7) != derive_seed(1, 8));
  CHECK(derive_seed(1, 7) != derive_seed(2, 7));
}

TEST_CASE("expected arrivals match long traces") {
  const auto slices = default_slices(4, 4, 2);
  const auto expected = expected_arrivals(slices, 1.0);
  const double horizon = 200.0;
  const auto trace = generate_packet_trace(slices, horizon, 3);
  std::array<double, kSliceCount> counted{};
  for (const auto& e : trace.events) counted[static_cast<std::size_t>(e.slice_id)] += 1.0;
  for (std::size_t s = 0; s < kSliceCount; ++s) {
    CHECK(counted[s] / horizon == doctest::Approx(expected[s]).epsilon(0.05));
  }
  RadioState st;
  st.arrived_packets = {static_cast<std::size_t>(expected[0]), 0, 0};
  const auto x = encode_radio_state(st, expected);
  REQUIRE(x.size() == kSliceCount);
  CHECK(x[0] == doctest::Approx(std::floor(expected[0]) / expected[0]));
  CHECK(x[1] == 0.0);
}

TEST_CASE("names parse and print") {
  for (auto s : {Scheme::kDql, Scheme::kDpNo, Scheme::kDpBw, Scheme::kHard, Scheme::kNone, Scheme::kNoPriority}) {
    CHECK(parse_scheme(to_string(s)) == s);
  }
  CHECK(parse_scenario("sfc") == Scenario::kSfc);
  CHECK(parse_profile("full") == Profile::kFull);
  CHECK_THROWS_AS(parse_scheme("greedy"), ConfigError);
  CHECK(scheme_valid_for(Scenario::kRadio, Scheme::kHard));
  CHECK_FALSE(scheme_valid_for(Scenario::kRadio, Scheme::kNoPriority));
  CHECK(scheme_valid_for(Scenario::kSfc, Scheme::kNoPriority));
  CHECK(scheme_valid_for(Scenario::kSfc, Scheme::kDql));
  CHECK_FALSE(scheme_valid_for(Scenario::kSfc, Scheme::kHard));
  CHECK(parse_sweep_axis("antenna_count") == SweepAxis::kAntennaCount);
  CHECK_THROWS_AS(parse_sweep_axis("users"), ConfigError);
}

TEST_CASE("profile defaults") {
  const auto desk = default_config(Scenario::kRadio, Scheme::kDql, Profile::kDesk);
  CHECK(desk.radio.volte_users == 9);
  CHECK(desk.radio.urllc_users == 2);
  CHECK(desk.radio.training_updates == 5000);
  const auto full = default_config(Scenario::kRadio, Scheme::kDql, Profile::kFull);
  CHECK(full.radio.volte_users == 46);
  CHECK(full.radio.video_users == 46);
  CHECK(full.radio.urllc_users == 8);
  CHECK(full.radio.training_updates == 50000);
  CHECK(full.radio.env.total_bandwidth == 10e6);
  const auto sfc = default_config(Scenario::kSfc, Scheme::kNoPriority);
  CHECK(sfc.sfc.flow_count == 10000);
  CHECK_NOTHROW(validate(sfc));
}

TEST_CASE("configuration JSON") {
  auto cfg = default_config(Scenario::kRadio, Scheme::kDpBw);
  cfg.seed = 17;
  cfg.radio.env.reward.qoe_weight = 1.0;
  cfg.radio.env.link.antenna_count = 16;
  cfg.agent.hidden = {32, 16};
  const auto j = to_json(cfg);
  const auto back = config_from_json(j);
  CHECK(to_json(back) == j);
  CHECK(config_echo(back) == config_echo(cfg));
  CHECK(back.seed == 17);
  CHECK(back.radio.env.link.antenna_count == 16);

  const auto sparse = config_from_json(nlohmann::json::parse(R"({"scenario": "sfc", "scheme": "no_priority"})"));
  CHECK(sparse.scenario == Scenario::kSfc);
  CHECK(sparse.sfc.flow_count == 10000);

  const auto overlay = config_from_json(nlohmann::json::parse(R"({"radio": {"users": [2, 3, 1], "qoe_weight": 1}})"));
  CHECK(overlay.radio.volte_users == 2);
  CHECK(overlay.radio.video_users == 3);
  CHECK(overlay.radio.env.reward.qoe_weight == 1.0);

  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"sceanrio": "radio"})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"radio": {"bandwith": 1}})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"scheme": "no_priority"})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"seed": "one"})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"agent": {"gamma": 2}})")), ConfigError);
}

TEST_CASE("radio baseline run is deterministic and writes its files") {
  const auto dir = scratch("radio_hard");
  auto cfg = small_radio(Scheme::kHard);
  cfg.output_dir = dir.string();
  const auto a = run_experiment(cfg);
  REQUIRE(a.radio);
  CHECK_FALSE(a.network);
  CHECK(a.radio->bandwidth_share[0] == doctest::Approx(0.34));
  CHECK(a.radio->se > 0.0);
  for (double q : a.radio->qoe) {
    CHECK(q >= 0.0);
    CHECK(q <= 1.0);
  }
  CHECK(line_count(dir / "epochs.csv") == 1 + 4);
  CHECK(line_count(dir / "summary.csv") == 2);
  CHECK(fs::exists(dir / "config.json"));
  CHECK_FALSE(fs::exists(dir / "checkpoint.nsqn"));
  const std::string first = slurp(dir / "epochs.csv");

  const auto b = run_experiment(cfg);
  CHECK(slurp(dir / "epochs.csv") == first);
  CHECK(a.metrics() == b.metrics());
  CHECK(a.trace_checksum == b.trace_checksum);

  auto other = cfg;
  other.seed = 2;
  other.output_dir.clear();
  CHECK(run_experiment(other).trace_checksum != a.trace_checksum);

  auto none = cfg;
  none.scheme = Scheme::kNone;
  none.output_dir.clear();
  CHECK(run_experiment(none).trace_checksum == a.trace_checksum);
  fs::remove_all(dir);
}

TEST_CASE("SFC no-priority run writes one row per flow") {
  const auto dir = scratch("sfc_np");
  auto cfg = default_config(Scenario::kSfc, Scheme::kNoPriority);
  cfg.output_dir = dir.string();
  const auto r = run_experiment(cfg);
  REQUIRE(r.sfc);
  CHECK(r.sfc->flows == 10000);
  CHECK(line_count(dir / "flows.csv") == 10001);
  CHECK(slurp(dir / "flows.csv").rfind("arrival_time_s,category,sfc,queue_time_s,processing_time_s,reward\n", 0) == 0);
  CHECK(line_count(dir / "windows.csv") > 1);
  double share = 0.0;
  for (double s : r.sfc->sfc_share) share += s;
  CHECK(share == doctest::Approx(1.0));
  CHECK(r.sfc->weighted_sojourn_a == doctest::Approx(3.0 * r.sfc->mean_sojourn[0]));
  CHECK(r.sfc->mean_sojourn[0] >= 0.010);
  CHECK(r.sfc->cpu_utilization > 0.0);
  CHECK(r.sfc->cpu_utilization <= 4.5);
  fs::remove_all(dir);
}

TEST_CASE("DQL smoke run and checkpoint reuse") {
  const auto dir = scratch("radio_dql");
  auto cfg = small_dql();
  cfg.output_dir = dir.string();
  const auto r = run_experiment(cfg);
  CHECK(r.updates == 20);
  REQUIRE(r.network);
  CHECK(r.network->output_dim() == 66);
  CHECK(r.network->input_dim() == kSliceCount);
  REQUIRE(fs::exists(dir / "checkpoint.nsqn"));
  CHECK(line_count(dir / "training.csv") > 20);

  const auto cp = load_checkpoint((dir / "checkpoint.nsqn").string());
  CHECK(cp.network.flatten() == r.network->flatten());
  CHECK(cp.config_echo == config_echo(cfg));
  auto eval = cfg;
  eval.output_dir.clear();
  const auto again = run_experiment(eval, &cp.network);
  CHECK(again.metrics() == r.metrics());
  CHECK(again.updates == 0);

  Rng rng = make_stream(1);
  const auto wrong = QNetwork::make(3, std::vector<std::size_t>{4}, 10, rng);
  CHECK_THROWS_AS(run_experiment(eval, &wrong), ConfigError);
  fs::remove_all(dir);
}

TEST_CASE("SFC DQL smoke run") {
  auto cfg = default_config(Scenario::kSfc, Scheme::kDql);
  cfg.sfc.flow_count = 300;
  cfg.sfc.training_flows = 400;
  cfg.sfc.normalization.calibration = 20;
  cfg.agent.hidden = {16};
  cfg.agent.epsilon_decay_steps = 200;
  const auto r = run_experiment(cfg);
  REQUIRE(r.sfc);
  CHECK(r.sfc->flows == 300);
  REQUIRE(r.network);
  CHECK(r.network->input_dim() == kSfcStateDim);
  CHECK(r.network->output_dim() == kSfcCount);
  CHECK(r.updates > 0);
}

TEST_CASE("comparison statistics") {
  const std::vector<ExperimentConfig> twins{small_radio(Scheme::kHard), small_radio(Scheme::kHard)};
  const std::uint64_t one[] = {5};
  const auto single = compare(twins, one);
  REQUIRE(single.schemes.size() == 2);
  for (const auto& m : single.schemes[0].metrics) {
    CHECK(m.stddev == 0.0);
    CHECK(m.values.size() == 1);
    CHECK(m.values == single.schemes[1].metrics[&m - single.schemes[0].metrics.data()].values);
  }

  const auto dir = scratch("compare");
  const std::vector<ExperimentConfig> pair{small_radio(Scheme::kHard), small_radio(Scheme::kDpNo)};
  const std::uint64_t seeds[] = {1, 2, 3};
  const auto rep = compare(pair, seeds, dir.string());
  const auto& se = rep.scheme(Scheme::kDpNo).metric("se");
  REQUIRE(se.values.size() == 3);
  const double mean = (se.values[0] + se.values[1] + se.values[2]) / 3.0;
  CHECK(se.mean == doctest::Approx(mean));
  double ss = 0.0;
  for (double v : se.values) ss += (v - mean) * (v - mean);
  CHECK(se.stddev == doctest::Approx(std::sqrt(ss / 2.0)));
  CHECK(rep.scheme(Scheme::kHard).trace_checksums == rep.scheme(Scheme::kDpNo).trace_checksums);
  CHECK(line_count(dir / "summary.csv") == 1 + 6);
  CHECK(fs::exists(dir / "report.csv"));
  CHECK_THROWS_AS(rep.scheme(Scheme::kDql), ContractViolation);
  CHECK_THROWS_AS(se.name == rep.scheme(Scheme::kHard).metric("latency").name, ContractViolation);
  fs::remove_all(dir);

  auto other_users = small_radio(Scheme::kDpNo);
  other_users.radio.volte_users = 4;
  const std::vector<ExperimentConfig> mismatched{small_radio(Scheme::kHard), other_users};
  CHECK_THROWS_AS(compare(mismatched, one), ContractViolation);
  const std::vector<ExperimentConfig> mixed{small_radio(Scheme::kHard), default_config(Scenario::kSfc, Scheme::kNoPriority)};
  CHECK_THROWS_AS(compare(mixed, one), ConfigError);
}

TEST_CASE("sweeps") {
  const std::vector<ExperimentConfig> base{small_radio(Scheme::kHard)};
  const std::uint64_t seeds[] = {1};
  CHECK_THROWS_AS(sweep(base, SweepAxis::kQoeWeight, std::vector<double>{}, seeds), ConfigError);
  CHECK_THROWS_AS(sweep(base, SweepAxis::kAntennaCount, std::vector<double>{2.5}, seeds), ConfigError);
  const auto points = sweep(base, SweepAxis::kAntennaCount, std::vector<double>{1.0, 64.0}, seeds);
  REQUIRE(points.size() == 2);
  CHECK(points[0].value == 1.0);
  const double se1 = points[0].report.scheme(Scheme::kHard).metric("se").mean;
  const double se64 = points[1].report.scheme(Scheme::kHard).metric("se").mean;
  CHECK(se64 >= se1);

  std::ostringstream os;
  write_report_csv(os, points[0].report);
  CHECK(os.str().rfind("scheme,metric,mean,stddev,replications\n", 0) == 0);
}
