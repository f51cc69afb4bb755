#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "netslice/dqn.hpp"
#include "netslice/radio_env.hpp"
#include "netslice/sfc_env.hpp"
#include "netslice/traffic.hpp"

namespace netslice {

enum class Scenario : std::uint8_t { kRadio, kSfc };
enum class Scheme : std::uint8_t { kDql, kDpNo, kDpBw, kHard, kNone, kNoPriority };
enum class Profile : std::uint8_t { kDesk, kFull };
enum class PredictorMethod : std::uint8_t { kExponentialSmoothing, kSlidingWindow };

std::string_view to_string(Scenario s);
std::string_view to_string(Scheme s);
std::string_view to_string(Profile p);
Scenario parse_scenario(std::string_view s);
Scheme parse_scheme(std::string_view s);
Profile parse_profile(std::string_view s);

bool scheme_valid_for(Scenario scenario, Scheme scheme);

/// Affine reward normalization for training: after `calibration` raw rewards
/// the offset and scale are frozen at their median and 1.4826 * MAD; scaled
/// rewards are clipped to +-clip.
struct RewardNormalization {
  std::size_t calibration = 200;
  double clip = 10.0;
};

struct RadioExperiment {
  std::size_t volte_users = 9;
  std::size_t video_users = 9;
  std::size_t urllc_users = 2;
  double cell_radius = 40.0;  // meters
  double min_distance = 1.0;  // meters
  RadioEnvConfig env{};
  double action_granularity = 1e6;    // Hz, agent action grid
  double baseline_granularity = 1e5;  // Hz, DP and hard slicing grid
  std::size_t training_updates = 5000;
  std::size_t eval_epochs = 300;
  PredictorMethod predictor = PredictorMethod::kExponentialSmoothing;
  double smoothing_factor = 0.5;
  std::size_t window_width = 5;
  std::array<double, kSliceCount> required_rates{51e3, 5e6, 10e6};
  RewardNormalization normalization{};
};

struct SfcExperiment {
  std::size_t flow_count = 10000;
  std::size_t training_flows = 30000;
  FlowRates rates = default_flow_rates();
  SfcRewardConfig reward{};
  double gap_scale = 0.1;     // seconds, history gap feature saturation
  double csv_window = 0.1;    // seconds, windowed waiting/CPU output
  RewardNormalization normalization{};
};

struct ExperimentConfig {
  Scenario scenario = Scenario::kRadio;
  Scheme scheme = Scheme::kHard;
  Profile profile = Profile::kDesk;
  std::uint64_t seed = 1;
  RadioExperiment radio{};
  SfcExperiment sfc{};
  AgentConfig agent{};
  std::string output_dir;  // empty: no files written
  bool write_checkpoint = true;
};

/// Profile defaults. Desk: 9/9/2 users, 5000 updates. Full: 46/46/8 users,
/// 50000 updates.
ExperimentConfig default_config(Scenario scenario, Scheme scheme, Profile profile = Profile::kDesk);

/// Throws ConfigError with a description of the first problem found.
void validate(const ExperimentConfig& cfg);

nlohmann::json to_json(const ExperimentConfig& cfg);

/// Profile defaults overlaid with the keys present in `j`. Unknown keys are
/// configuration errors.
ExperimentConfig config_from_json(const nlohmann::json& j);

/// Canonical text form used for config echoes and checkpoints.
std::string config_echo(const ExperimentConfig& cfg);

}  // namespace netslice
