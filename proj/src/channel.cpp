#include "netslice/channel.hpp"

#include <cmath>

#include "netslice/errors.hpp"

namespace netslice {

void validate(const LinkConfig& cfg) {
  if (cfg.antenna_count == 0) throw ConfigError("antenna_count must be positive");
  if (!(cfg.slot_duration > 0.0)) throw ConfigError("slot_duration must be positive");
  if (!(cfg.path_loss_exponent >= 2.0)) throw ConfigError("path_loss_exponent must be >= 2");
  if (!(cfg.reference_distance > 0.0)) throw ConfigError("reference_distance must be positive");
  if (!std::isfinite(cfg.reference_snr_db)) throw ConfigError("reference_snr_db must be finite");
}

double mean_snr_at(double distance, const LinkConfig& cfg) {
  const double ref = std::pow(10.0, cfg.reference_snr_db / 10.0);
  return ref * std::pow(distance / cfg.reference_distance, -cfg.path_loss_exponent);
}

std::vector<UserLink> make_links(const std::vector<double>& distances, const LinkConfig& cfg) {
  validate(cfg);
  std::vector<UserLink> links;
  links.reserve(distances.size());
  for (std::uint32_t i = 0; i < distances.size(); ++i) {
    if (!(distances[i] > 0.0)) throw ConfigError("user distance must be positive");
    links.push_back(UserLink{i, distances[i], mean_snr_at(distances[i], cfg)});
  }
  return links;
}

double fading_gain(Rng& rng) { return -std::log1p(-uniform01(rng)); }

double draw_fading(const LinkConfig& cfg, Rng& rng) {
  return cfg.fading == FadingModel::kRayleigh ? fading_gain(rng) : 1.0;
}

double achievable_rate(double bandwidth, const UserLink& link, double fading, const LinkConfig& cfg) {
  if (bandwidth < 0.0) throw ContractViolation("achievable_rate: negative bandwidth");
  if (bandwidth == 0.0) return 0.0;
  const double snr = static_cast<double>(cfg.antenna_count) * fading * link.mean_snr;
  return bandwidth * std::log2(1.0 + snr);
}

}  // namespace netslice
