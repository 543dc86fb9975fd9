// Quantizer-depth sampling for dropout during training.  Depths are drawn
// from a discrete distribution over [1, n_layers]; a three-stage schedule
// switches from uniform warmup to a shaped distribution and finally to
// shallow depths only.
#pragma once

#include <string>
#include <vector>

#include "mbc/error.hpp"
#include "mbc/rng.hpp"

namespace mbc {

struct DepthDistribution {
  enum class Kind { uniform, exponential, half_gaussian, chi_squared, range };

  Kind kind = Kind::uniform;
  double base = 0.0;   // exponential: weight ratio per layer, in (0, 1)
  double sigma = 0.0;  // half_gaussian: spread, > 0
  double df = 0.0;     // chi_squared: degrees of freedom, >= 1
  int lo = 0, hi = 0;  // range: inclusive bounds, 1 <= lo <= hi

  static DepthDistribution uniform();
  static DepthDistribution exponential(double base);
  static DepthDistribution half_gaussian(double sigma);
  static DepthDistribution chi_squared(double df);
  static DepthDistribution range(int lo, int hi);
};

// Accepts "uniform", "exponential:0.6", "half_gaussian:5.0",
// "chi_squared:4", "range:1:4".
DepthDistribution parse_distribution(const std::string& text);
std::string to_string(const DepthDistribution& dist);

// Probability mass over depths 1..n_layers; sums to 1.
//   uniform:       w_k = 1
//   exponential:   w_k = base^(k-1)
//   half_gaussian: w_k = exp(-(k-1)^2 / (2 sigma^2))
//   chi_squared:   w_k = k^(df/2 - 1) exp(-k/2)
//   range:         w_k = 1 on [lo, hi] intersected with [1, n_layers]
std::vector<double> pmf(const DepthDistribution& dist, int n_layers);

// Inverse-CDF draw from pmf(dist, n_layers).
int sample_depth(const DepthDistribution& dist, int n_layers, Rng& rng);

// Stage 1 (step < s1): uniform over all depths.  Stage 2 (s1 <= step < s2):
// the configured distribution.  Stage 3 (step >= s2): uniform over depths
// 1..4 (clipped to n_layers).
struct DropoutSchedule {
  long s1 = 0;
  long s2 = 0;
  DepthDistribution stage2;
};

int stage_of(const DropoutSchedule& schedule, long step);
DepthDistribution stage_distribution(const DropoutSchedule& schedule, int stage);
int schedule_depth(const DropoutSchedule& schedule, long step, int n_layers, Rng& rng);

}  // namespace mbc
