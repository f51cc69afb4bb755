#pragma once

#include <cstdint>
#include <vector>

#include "netslice/rng.hpp"

namespace netslice {

enum class FadingModel : std::uint8_t { kRayleigh, kNone };

struct LinkConfig {
  std::size_t antenna_count = 32;
  double reference_snr_db = 20.0;
  double reference_distance = 40.0;  // meters
  double path_loss_exponent = 3.5;
  double slot_duration = 0.0005;  // seconds
  FadingModel fading = FadingModel::kRayleigh;
};

void validate(const LinkConfig& cfg);

struct UserLink {
  std::uint32_t user_id = 0;
  double distance = 0.0;  // meters
  double mean_snr = 0.0;  // linear, before array gain and fading
};

/// Log-distance mean SNR: reference SNR scaled by (d / d_ref)^(-exponent).
double mean_snr_at(double distance, const LinkConfig& cfg);

std::vector<UserLink> make_links(const std::vector<double>& distances, const LinkConfig& cfg);

/// Unit-mean exponential power gain (|h|^2 of a Rayleigh amplitude).
double fading_gain(Rng& rng);

/// Fading draw honoring cfg.fading; kNone yields exactly 1.
double draw_fading(const LinkConfig& cfg, Rng& rng);

/// Shannon rate with the array gain applied inside the log:
/// bandwidth * log2(1 + antenna_count * fading * mean_snr).
/// Throws ContractViolation for negative bandwidth.
double achievable_rate(double bandwidth, const UserLink& link, double fading, const LinkConfig& cfg);

}  // namespace netslice
