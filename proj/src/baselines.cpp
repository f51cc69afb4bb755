#include "netslice/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "netslice/errors.hpp"

namespace netslice {

DemandPredictor DemandPredictor::exponential_smoothing(double factor) {
  if (!(factor > 0.0 && factor <= 1.0)) throw ConfigError("smoothing factor must lie in (0, 1]");
  return DemandPredictor(Method::kExponentialSmoothing, factor, 1);
}

DemandPredictor DemandPredictor::sliding_window(std::size_t width) {
  if (width == 0) throw ConfigError("sliding window width must be >= 1");
  return DemandPredictor(Method::kSlidingWindow, 1.0, width);
}

std::vector<double> DemandPredictor::update(std::span<const double> latest_counts) {
  for (double c : latest_counts) {
    if (!(c >= 0.0)) throw ContractViolation("demand counts must be nonnegative");
  }
  std::vector<double> latest(latest_counts.begin(), latest_counts.end());
  if (method_ == Method::kExponentialSmoothing) {
    if (smoothed_.empty()) {
      smoothed_ = latest;
    } else {
      if (smoothed_.size() != latest.size()) throw ContractViolation("slice count changed between updates");
      for (std::size_t i = 0; i < latest.size(); ++i) {
        smoothed_[i] = factor_ * latest[i] + (1.0 - factor_) * smoothed_[i];
      }
    }
    return smoothed_;
  }
  if (!window_.empty() && window_.front().size() != latest.size()) {
    throw ContractViolation("slice count changed between updates");
  }
  window_.push_back(std::move(latest));
  if (window_.size() > width_) window_.pop_front();
  std::vector<double> mean(window_.front().size(), 0.0);
  for (const auto& row : window_) {
    for (std::size_t i = 0; i < row.size(); ++i) mean[i] += row[i];
  }
  for (double& m : mean) m /= static_cast<double>(window_.size());
  return mean;
}

std::vector<double> predict_demand(DemandPredictor& predictor, std::span<const double> latest_counts) {
  return predictor.update(latest_counts);
}

std::vector<double> proportional_shares(std::span<const double> weights, double total_bandwidth) {
  if (weights.empty()) throw ContractViolation("no slices to allocate");
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw ContractViolation("allocation weights must be nonnegative");
    sum += w;
  }
  std::vector<double> shares(weights.size());
  if (sum == 0.0) {
    std::fill(shares.begin(), shares.end(), total_bandwidth / static_cast<double>(weights.size()));
    return shares;
  }
  for (std::size_t i = 0; i < weights.size(); ++i) shares[i] = total_bandwidth * (weights[i] / sum);
  return shares;
}

BandwidthAllocation round_to_granularity(std::span<const double> shares, double total_bandwidth, double granularity) {
  if (!(granularity > 0.0) || !(total_bandwidth > 0.0)) {
    throw ConfigError("bandwidth and granularity must be positive");
  }
  const double units_f = std::round(total_bandwidth / granularity);
  if (std::abs(units_f * granularity - total_bandwidth) > 1e-9 * total_bandwidth) {
    throw ConfigError("granularity does not divide the total bandwidth");
  }
  const auto units = static_cast<long long>(units_f);

  std::vector<long long> whole(shares.size());
  std::vector<double> remainder(shares.size());
  long long assigned = 0;
  for (std::size_t i = 0; i < shares.size(); ++i) {
    // The small slack keeps exact multiples from flooring one unit low.
    const double q = std::max(0.0, shares[i] / granularity);
    const double f = std::floor(q + 1e-9);
    whole[i] = static_cast<long long>(f);
    remainder[i] = std::max(0.0, q - f);
    assigned += whole[i];
  }
  std::vector<std::size_t> order(shares.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < units; ++k) {
    ++whole[order[k % order.size()]];
    ++assigned;
  }
  // Shares that over-shoot (only possible through rounding slack) give back
  // units from the smallest remainders.
  for (std::size_t k = order.size(); assigned > units;) {
    k = (k == 0 ? order.size() : k) - 1;
    if (whole[order[k]] > 0) {
      --whole[order[k]];
      --assigned;
    }
  }

  BandwidthAllocation out;
  out.per_slice.resize(shares.size());
  for (std::size_t i = 0; i < shares.size(); ++i) out.per_slice[i] = static_cast<double>(whole[i]) * granularity;
  return out;
}

BandwidthAllocation dp_no_allocation(std::span<const double> predicted, double total_bandwidth, double granularity) {
  const auto shares = proportional_shares(predicted, total_bandwidth);
  return round_to_granularity(shares, total_bandwidth, granularity);
}

BandwidthAllocation dp_bw_allocation(std::span<const double> predicted, const RequiredRates& rates,
                                     double total_bandwidth, double granularity) {
  if (predicted.size() != rates.rate.size()) throw ContractViolation("dp_bw: one prediction per slice required");
  std::vector<double> weights(predicted.size());
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (!(rates.rate[i] > 0.0)) throw ConfigError("required rates must be positive");
    weights[i] = predicted[i] * rates.rate[i];
  }
  return dp_no_allocation(weights, total_bandwidth, granularity);
}

BandwidthAllocation hard_slicing(double total_bandwidth, std::size_t slice_count, double granularity) {
  if (slice_count == 0) throw ConfigError("hard_slicing: slice_count must be >= 1");
  const std::vector<double> equal(slice_count, 1.0);
  const auto shares = proportional_shares(equal, total_bandwidth);
  return round_to_granularity(shares, total_bandwidth, granularity);
}

SfcId no_priority_assign(const SfcSystem& system, FlowCategory category) {
  const auto& specs = system.specs();
  std::size_t best = 0;
  double best_time = system.projected_sojourn(specs[0].id, category);
  for (std::size_t s = 1; s < kSfcCount; ++s) {
    const double t = system.projected_sojourn(specs[s].id, category);
    const double tol = 1e-12 * std::max(1.0, best_time);
    if (t < best_time - tol || (t <= best_time + tol && specs[s].cpu_cost < specs[best].cpu_cost)) {
      best = s;
      best_time = t;
    }
  }
  return specs[best].id;
}

}  // namespace netslice
