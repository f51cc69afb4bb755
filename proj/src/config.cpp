#include "netslice/config.hpp"

#include <cmath>
#include <functional>
#include <map>

#include "netslice/errors.hpp"

namespace netslice {

using nlohmann::json;

std::string_view to_string(Scenario s) { return s == Scenario::kRadio ? "radio" : "sfc"; }

std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::kDql: return "dql";
    case Scheme::kDpNo: return "dp_no";
    case Scheme::kDpBw: return "dp_bw";
    case Scheme::kHard: return "hard";
    case Scheme::kNone: return "none";
    case Scheme::kNoPriority: return "no_priority";
  }
  return "?";
}

std::string_view to_string(Profile p) { return p == Profile::kDesk ? "desk" : "full"; }

Scenario parse_scenario(std::string_view s) {
  if (s == "radio") return Scenario::kRadio;
  if (s == "sfc") return Scenario::kSfc;
  throw ConfigError("unknown scenario '" + std::string(s) + "' (expected radio or sfc)");
}

Scheme parse_scheme(std::string_view s) {
  for (Scheme k : {Scheme::kDql, Scheme::kDpNo, Scheme::kDpBw, Scheme::kHard, Scheme::kNone, Scheme::kNoPriority}) {
    if (to_string(k) == s) return k;
  }
  throw ConfigError("unknown scheme '" + std::string(s) + "'");
}

Profile parse_profile(std::string_view s) {
  if (s == "desk") return Profile::kDesk;
  if (s == "full") return Profile::kFull;
  throw ConfigError("unknown profile '" + std::string(s) + "' (expected desk or full)");
}

bool scheme_valid_for(Scenario scenario, Scheme scheme) {
  if (scheme == Scheme::kDql) return true;
  if (scenario == Scenario::kSfc) return scheme == Scheme::kNoPriority;
  return scheme != Scheme::kNoPriority;
}

ExperimentConfig default_config(Scenario scenario, Scheme scheme, Profile profile) {
  ExperimentConfig cfg;
  cfg.scenario = scenario;
  cfg.scheme = scheme;
  cfg.profile = profile;
  cfg.radio.env.sla_reading = SlaReading::kServiceStart;
  cfg.agent.optimizer = OptimizerKind::kAdam;
  cfg.agent.learning_rate = 1e-3;
  if (profile == Profile::kFull) {
    cfg.radio.volte_users = 46;
    cfg.radio.video_users = 46;
    cfg.radio.urllc_users = 8;
    cfg.radio.training_updates = 50000;
  }
  if (scenario == Scenario::kRadio) {
    cfg.agent.epsilon_decay_steps = cfg.radio.training_updates * 3 / 5;
    cfg.agent.replay_capacity = 5000;
  } else {
    cfg.agent.epsilon_decay_steps = cfg.sfc.training_flows / 2;
  }
  return cfg;
}

void validate(const ExperimentConfig& cfg) {
  if (!scheme_valid_for(cfg.scenario, cfg.scheme)) {
    throw ConfigError("scheme '" + std::string(to_string(cfg.scheme)) + "' is not available for the " +
                      std::string(to_string(cfg.scenario)) + " scenario");
  }
  validate(cfg.agent);
  if (cfg.scenario == Scenario::kRadio) {
    const auto& r = cfg.radio;
    validate(r.env);
    if (r.volte_users + r.video_users + r.urllc_users == 0) throw ConfigError("radio scenario needs users");
    if (!(r.cell_radius > 0.0) || !(r.min_distance > 0.0) || r.min_distance > r.cell_radius) {
      throw ConfigError("need 0 < min_distance <= cell_radius");
    }
    if (r.eval_epochs == 0) throw ConfigError("eval_epochs must be >= 1");
    if (r.training_updates == 0) throw ConfigError("training_updates must be >= 1");
    if (!(r.smoothing_factor > 0.0 && r.smoothing_factor <= 1.0)) throw ConfigError("smoothing_factor must lie in (0, 1]");
    if (r.window_width == 0) throw ConfigError("window_width must be >= 1");
    for (double rate : r.required_rates) {
      if (!(rate > 0.0)) throw ConfigError("required rates must be positive");
    }
    // Both grids must tile the band.
    action_space(r.env.total_bandwidth, r.action_granularity, 1);
    action_space(r.env.total_bandwidth, r.baseline_granularity, 1);
    if (r.normalization.calibration == 0 || !(r.normalization.clip > 0.0)) {
      throw ConfigError("reward normalization needs calibration >= 1 and clip > 0");
    }
  } else {
    const auto& s = cfg.sfc;
    if (s.flow_count == 0) throw ConfigError("flow_count must be >= 1");
    if (cfg.scheme == Scheme::kDql && s.training_flows == 0) throw ConfigError("training_flows must be >= 1");
    for (const auto& g : s.rates) validate(InterArrivalModel{g});
    validate(s.reward);
    if (!(s.gap_scale > 0.0) || !(s.csv_window > 0.0)) throw ConfigError("gap_scale and csv_window must be positive");
    if (s.normalization.calibration == 0 || !(s.normalization.clip > 0.0)) {
      throw ConfigError("reward normalization needs calibration >= 1 and clip > 0");
    }
  }
}

// ---------------------------------------------------------------------------

namespace {

std::string_view to_string(SlaReading r) { return r == SlaReading::kEndToEnd ? "end_to_end" : "service_start"; }
std::string_view to_string(QoeAggregation a) { return a == QoeAggregation::kPooled ? "pooled" : "slice_mean"; }
std::string_view to_string(FadingModel f) { return f == FadingModel::kRayleigh ? "rayleigh" : "none"; }
std::string_view to_string(PredictorMethod p) {
  return p == PredictorMethod::kExponentialSmoothing ? "exponential_smoothing" : "sliding_window";
}
std::string_view to_string(OptimizerKind o) { return o == OptimizerKind::kSgd ? "sgd" : "adam"; }

template <typename E>
E parse_enum(const json& v, std::initializer_list<E> options, std::string_view key) {
  const auto s = v.get<std::string>();
  for (E e : options) {
    if (to_string(e) == s) return e;
  }
  throw ConfigError("invalid value '" + s + "' for " + std::string(key));
}

using Handlers = std::map<std::string, std::function<void(const json&)>>;

void apply(const json& obj, const Handlers& handlers, std::string_view where) {
  if (!obj.is_object()) throw ConfigError(std::string(where) + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    const auto it = handlers.find(key);
    if (it == handlers.end()) throw ConfigError("unknown key '" + key + "' in " + std::string(where));
    it->second(value);
  }
}

std::size_t get_count(const json& v) {
  if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigError("expected a nonnegative integer");
  return v.get<std::size_t>();
}

json agent_json(const AgentConfig& a) {
  return json{{"gamma", a.gamma},
              {"learning_rate", a.learning_rate},
              {"epsilon_start", a.epsilon_start},
              {"epsilon_end", a.epsilon_end},
              {"epsilon_decay_steps", a.epsilon_decay_steps},
              {"batch_size", a.batch_size},
              {"clone_period", a.clone_period},
              {"replay_capacity", a.replay_capacity},
              {"hidden", a.hidden},
              {"optimizer", to_string(a.optimizer)},
              {"adam_beta1", a.adam_beta1},
              {"adam_beta2", a.adam_beta2},
              {"adam_epsilon", a.adam_epsilon}};
}

void read_agent(const json& j, AgentConfig& a) {
  apply(j,
        {{"gamma", [&](const json& v) { a.gamma = v.get<double>(); }},
         {"learning_rate", [&](const json& v) { a.learning_rate = v.get<double>(); }},
         {"epsilon_start", [&](const json& v) { a.epsilon_start = v.get<double>(); }},
         {"epsilon_end", [&](const json& v) { a.epsilon_end = v.get<double>(); }},
         {"epsilon_decay_steps", [&](const json& v) { a.epsilon_decay_steps = get_count(v); }},
         {"batch_size", [&](const json& v) { a.batch_size = get_count(v); }},
         {"clone_period", [&](const json& v) { a.clone_period = get_count(v); }},
         {"replay_capacity", [&](const json& v) { a.replay_capacity = get_count(v); }},
         {"hidden",
          [&](const json& v) {
            a.hidden.clear();
            for (const auto& h : v) a.hidden.push_back(get_count(h));
          }},
         {"optimizer",
          [&](const json& v) { a.optimizer = parse_enum(v, {OptimizerKind::kSgd, OptimizerKind::kAdam}, "optimizer"); }},
         {"adam_beta1", [&](const json& v) { a.adam_beta1 = v.get<double>(); }},
         {"adam_beta2", [&](const json& v) { a.adam_beta2 = v.get<double>(); }},
         {"adam_epsilon", [&](const json& v) { a.adam_epsilon = v.get<double>(); }}},
        "agent");
}

json radio_json(const RadioExperiment& r) {
  const auto& e = r.env;
  return json{{"users", {r.volte_users, r.video_users, r.urllc_users}},
              {"cell_radius_m", r.cell_radius},
              {"min_distance_m", r.min_distance},
              {"total_bandwidth_hz", e.total_bandwidth},
              {"epoch_duration_s", e.epoch_duration},
              {"antenna_count", e.link.antenna_count},
              {"reference_snr_db", e.link.reference_snr_db},
              {"reference_distance_m", e.link.reference_distance},
              {"path_loss_exponent", e.link.path_loss_exponent},
              {"slot_duration_s", e.link.slot_duration},
              {"fading", to_string(e.link.fading)},
              {"se_weight", e.reward.se_weight},
              {"qoe_weight", e.reward.qoe_weight},
              {"qoe_aggregation", to_string(e.reward.aggregation)},
              {"sla_reading", to_string(e.sla_reading)},
              {"drop_after_deadline", e.drop_after_deadline},
              {"action_granularity_hz", r.action_granularity},
              {"baseline_granularity_hz", r.baseline_granularity},
              {"training_updates", r.training_updates},
              {"eval_epochs", r.eval_epochs},
              {"predictor", to_string(r.predictor)},
              {"smoothing_factor", r.smoothing_factor},
              {"window_width", r.window_width},
              {"required_rates_bps", r.required_rates},
              {"reward_calibration", r.normalization.calibration},
              {"reward_clip", r.normalization.clip}};
}

void read_radio(const json& j, RadioExperiment& r) {
  auto& e = r.env;
  apply(j,
        {{"users",
          [&](const json& v) {
            if (!v.is_array() || v.size() != kSliceCount) throw ConfigError("users must list three slice counts");
            r.volte_users = get_count(v[0]);
            r.video_users = get_count(v[1]);
            r.urllc_users = get_count(v[2]);
          }},
         {"cell_radius_m", [&](const json& v) { r.cell_radius = v.get<double>(); }},
         {"min_distance_m", [&](const json& v) { r.min_distance = v.get<double>(); }},
         {"total_bandwidth_hz", [&](const json& v) { e.total_bandwidth = v.get<double>(); }},
         {"epoch_duration_s", [&](const json& v) { e.epoch_duration = v.get<double>(); }},
         {"antenna_count", [&](const json& v) { e.link.antenna_count = get_count(v); }},
         {"reference_snr_db", [&](const json& v) { e.link.reference_snr_db = v.get<double>(); }},
         {"reference_distance_m", [&](const json& v) { e.link.reference_distance = v.get<double>(); }},
         {"path_loss_exponent", [&](const json& v) { e.link.path_loss_exponent = v.get<double>(); }},
         {"slot_duration_s", [&](const json& v) { e.link.slot_duration = v.get<double>(); }},
         {"fading",
          [&](const json& v) { e.link.fading = parse_enum(v, {FadingModel::kRayleigh, FadingModel::kNone}, "fading"); }},
         {"se_weight", [&](const json& v) { e.reward.se_weight = v.get<double>(); }},
         {"qoe_weight", [&](const json& v) { e.reward.qoe_weight = v.get<double>(); }},
         {"qoe_aggregation",
          [&](const json& v) {
            e.reward.aggregation =
                parse_enum(v, {QoeAggregation::kPooled, QoeAggregation::kSliceMean}, "qoe_aggregation");
          }},
         {"sla_reading",
          [&](const json& v) {
            e.sla_reading = parse_enum(v, {SlaReading::kEndToEnd, SlaReading::kServiceStart}, "sla_reading");
          }},
         {"drop_after_deadline", [&](const json& v) { e.drop_after_deadline = v.get<bool>(); }},
         {"action_granularity_hz", [&](const json& v) { r.action_granularity = v.get<double>(); }},
         {"baseline_granularity_hz", [&](const json& v) { r.baseline_granularity = v.get<double>(); }},
         {"training_updates", [&](const json& v) { r.training_updates = get_count(v); }},
         {"eval_epochs", [&](const json& v) { r.eval_epochs = get_count(v); }},
         {"predictor",
          [&](const json& v) {
            r.predictor = parse_enum(v, {PredictorMethod::kExponentialSmoothing, PredictorMethod::kSlidingWindow},
                                     "predictor");
          }},
         {"smoothing_factor", [&](const json& v) { r.smoothing_factor = v.get<double>(); }},
         {"window_width", [&](const json& v) { r.window_width = get_count(v); }},
         {"required_rates_bps",
          [&](const json& v) {
            if (!v.is_array() || v.size() != kSliceCount) throw ConfigError("required_rates_bps needs three values");
            for (std::size_t i = 0; i < kSliceCount; ++i) r.required_rates[i] = v[i].get<double>();
          }},
         {"reward_calibration", [&](const json& v) { r.normalization.calibration = get_count(v); }},
         {"reward_clip", [&](const json& v) { r.normalization.clip = v.get<double>(); }}},
        "radio");
}

json sfc_json(const SfcExperiment& s) {
  std::vector<double> mu, sigma;
  for (const auto& g : s.rates) {
    mu.push_back(g.mu);
    sigma.push_back(g.sigma);
  }
  return json{{"flow_count", s.flow_count},
              {"training_flows", s.training_flows},
              {"flow_gap_mu", mu},
              {"flow_gap_sigma", sigma},
              {"category_weights", s.reward.category_weights},
              {"gap_scale_s", s.gap_scale},
              {"csv_window_s", s.csv_window},
              {"reward_calibration", s.normalization.calibration},
              {"reward_clip", s.normalization.clip}};
}

void read_triple(const json& v, std::array<double, 3>& out, std::string_view key) {
  if (!v.is_array() || v.size() != 3) throw ConfigError(std::string(key) + " needs three values");
  for (std::size_t i = 0; i < 3; ++i) out[i] = v[i].get<double>();
}

void read_sfc(const json& j, SfcExperiment& s) {
  apply(j,
        {{"flow_count", [&](const json& v) { s.flow_count = get_count(v); }},
         {"training_flows", [&](const json& v) { s.training_flows = get_count(v); }},
         {"flow_gap_mu",
          [&](const json& v) {
            std::array<double, 3> mu{};
            read_triple(v, mu, "flow_gap_mu");
            for (std::size_t i = 0; i < 3; ++i) s.rates[i].mu = mu[i];
          }},
         {"flow_gap_sigma",
          [&](const json& v) {
            std::array<double, 3> sigma{};
            read_triple(v, sigma, "flow_gap_sigma");
            for (std::size_t i = 0; i < 3; ++i) s.rates[i].sigma = sigma[i];
          }},
         {"category_weights", [&](const json& v) { read_triple(v, s.reward.category_weights, "category_weights"); }},
         {"gap_scale_s", [&](const json& v) { s.gap_scale = v.get<double>(); }},
         {"csv_window_s", [&](const json& v) { s.csv_window = v.get<double>(); }},
         {"reward_calibration", [&](const json& v) { s.normalization.calibration = get_count(v); }},
         {"reward_clip", [&](const json& v) { s.normalization.clip = v.get<double>(); }}},
        "sfc");
}

}  // namespace

json to_json(const ExperimentConfig& cfg) {
  return json{{"scenario", to_string(cfg.scenario)},
              {"scheme", to_string(cfg.scheme)},
              {"profile", to_string(cfg.profile)},
              {"seed", cfg.seed},
              {"output_dir", cfg.output_dir},
              {"write_checkpoint", cfg.write_checkpoint},
              {"radio", radio_json(cfg.radio)},
              {"sfc", sfc_json(cfg.sfc)},
              {"agent", agent_json(cfg.agent)}};
}

ExperimentConfig config_from_json(const json& j) {
  try {
    if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
    const Profile profile = j.contains("profile") ? parse_profile(j.at("profile").get<std::string>()) : Profile::kDesk;
    const Scenario scenario =
        j.contains("scenario") ? parse_scenario(j.at("scenario").get<std::string>()) : Scenario::kRadio;
    const Scheme scheme = j.contains("scheme")
                              ? parse_scheme(j.at("scheme").get<std::string>())
                              : (scenario == Scenario::kRadio ? Scheme::kHard : Scheme::kNoPriority);
    ExperimentConfig cfg = default_config(scenario, scheme, profile);
    apply(j,
          {{"scenario", [](const json&) {}},
           {"scheme", [](const json&) {}},
           {"profile", [](const json&) {}},
           {"seed", [&](const json& v) { cfg.seed = v.get<std::uint64_t>(); }},
           {"output_dir", [&](const json& v) { cfg.output_dir = v.get<std::string>(); }},
           {"write_checkpoint", [&](const json& v) { cfg.write_checkpoint = v.get<bool>(); }},
           {"radio", [&](const json& v) { read_radio(v, cfg.radio); }},
           {"sfc", [&](const json& v) { read_sfc(v, cfg.sfc); }},
           {"agent", [&](const json& v) { read_agent(v, cfg.agent); }},
           // Consumed by the compare and sweep commands.
           {"schemes", [](const json&) {}},
           {"seeds", [](const json&) {}},
           {"sweep", [](const json&) {}}},
          "configuration");
    const bool decay_given = j.contains("agent") && j.at("agent").contains("epsilon_decay_steps");
    if (!decay_given) {
      const ExperimentConfig base = default_config(scenario, scheme, profile);
      cfg.agent.epsilon_decay_steps =
          scenario == Scenario::kRadio ? cfg.radio.training_updates * 3 / 5 : cfg.sfc.training_flows / 2;
      if (cfg.agent.epsilon_decay_steps == 0) cfg.agent.epsilon_decay_steps = base.agent.epsilon_decay_steps;
    }
    validate(cfg);
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed configuration: ") + e.what());
  }
}

std::string config_echo(const ExperimentConfig& cfg) { return to_json(cfg).dump(2) + "\n"; }

}  // namespace netslice
