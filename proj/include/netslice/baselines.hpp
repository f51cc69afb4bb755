#pragma once

#include <array>
#include <cstddef>
#include <deque>
#include <span>
#include <vector>

#include "netslice/radio_env.hpp"
#include "netslice/sfc_env.hpp"

namespace netslice {

/// Per-slice packet-count forecaster used by the demand-prediction schemes.
class DemandPredictor {
 public:
  enum class Method { kExponentialSmoothing, kSlidingWindow };

  static DemandPredictor exponential_smoothing(double factor);
  static DemandPredictor sliding_window(std::size_t width);

  /// Folds in the latest epoch's counts and returns the next prediction.
  /// The first call returns the counts unchanged.
  std::vector<double> update(std::span<const double> latest_counts);

  Method method() const { return method_; }

 private:
  DemandPredictor(Method m, double factor, std::size_t width) : method_(m), factor_(factor), width_(width) {}

  Method method_;
  double factor_ = 1.0;
  std::size_t width_ = 1;
  std::vector<double> smoothed_;
  std::deque<std::vector<double>> window_;
};

std::vector<double> predict_demand(DemandPredictor& predictor, std::span<const double> latest_counts);

struct RequiredRates {
  std::array<double, kSliceCount> rate{51e3, 5e6, 10e6};  // bits/s
};

/// W * weight_i / sum(weights); equal split when every weight is zero.
std::vector<double> proportional_shares(std::span<const double> weights, double total_bandwidth);

/// Largest-remainder rounding onto the granularity grid; the result sums to
/// exactly total_bandwidth. Remainder ties go to the lower index.
BandwidthAllocation round_to_granularity(std::span<const double> shares, double total_bandwidth, double granularity);

BandwidthAllocation dp_no_allocation(std::span<const double> predicted, double total_bandwidth, double granularity);
BandwidthAllocation dp_bw_allocation(std::span<const double> predicted, const RequiredRates& rates,
                                     double total_bandwidth, double granularity);

/// Equal split; leftover grid units go to the lowest-index slices.
BandwidthAllocation hard_slicing(double total_bandwidth, std::size_t slice_count, double granularity);

/// SFC with the smallest projected sojourn for a `category` flow at the
/// system clock; ties go to the cheaper CPU.
SfcId no_priority_assign(const SfcSystem& system, FlowCategory category);

}  // namespace netslice
