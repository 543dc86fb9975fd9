#include "mbc/depth_sampler.hpp"

#include <cmath>

namespace mbc {

DepthDistribution DepthDistribution::uniform() {
  DepthDistribution d;
  d.kind = Kind::uniform;
  return d;
}

DepthDistribution DepthDistribution::exponential(double base) {
  if (!(base > 0.0 && base < 1.0))
    fail(ErrorCode::bad_distribution, "exponential base must lie in (0, 1)");
  DepthDistribution d;
  d.kind = Kind::exponential;
  d.base = base;
  return d;
}

DepthDistribution DepthDistribution::half_gaussian(double sigma) {
  if (!(sigma > 0.0))
    fail(ErrorCode::bad_distribution, "half-gaussian sigma must be positive");
  DepthDistribution d;
  d.kind = Kind::half_gaussian;
  d.sigma = sigma;
  return d;
}

DepthDistribution DepthDistribution::chi_squared(double df) {
  if (!(df >= 1.0))
    fail(ErrorCode::bad_distribution, "chi-squared df must be at least 1");
  DepthDistribution d;
  d.kind = Kind::chi_squared;
  d.df = df;
  return d;
}

DepthDistribution DepthDistribution::range(int lo, int hi) {
  if (lo < 1 || hi < lo) fail(ErrorCode::bad_distribution, "bad range bounds");
  DepthDistribution d;
  d.kind = Kind::range;
  d.lo = lo;
  d.hi = hi;
  return d;
}

DepthDistribution parse_distribution(const std::string& text) {
  std::vector<std::string> parts;
  size_t start = 0;
  while (true) {
    size_t colon = text.find(':', start);
    parts.push_back(text.substr(start, colon - start));
    if (colon == std::string::npos) break;
    start = colon + 1;
  }
  auto number = [&](size_t i) {
    try {
      size_t used = 0;
      double v = std::stod(parts.at(i), &used);
      if (used != parts[i].size()) throw std::invalid_argument(parts[i]);
      return v;
    } catch (const std::exception&) {
      fail(ErrorCode::bad_distribution, "bad parameter in '" + text + "'");
    }
  };

  const std::string& name = parts[0];
  if (name == "uniform" && parts.size() == 1) return DepthDistribution::uniform();
  if (name == "exponential" && parts.size() == 2)
    return DepthDistribution::exponential(number(1));
  if (name == "half_gaussian" && parts.size() == 2)
    return DepthDistribution::half_gaussian(number(1));
  if (name == "chi_squared" && parts.size() == 2)
    return DepthDistribution::chi_squared(number(1));
  if (name == "range" && parts.size() == 3) {
    double lo = number(1), hi = number(2);
    if (lo != std::floor(lo) || hi != std::floor(hi))
      fail(ErrorCode::bad_distribution, "range bounds must be integers");
    return DepthDistribution::range(static_cast<int>(lo), static_cast<int>(hi));
  }
  fail(ErrorCode::bad_distribution, "unknown distribution '" + text + "'");
}

std::string to_string(const DepthDistribution& dist) {
  char buf[64];
  switch (dist.kind) {
    case DepthDistribution::Kind::uniform:
      return "uniform";
    case DepthDistribution::Kind::exponential:
      std::snprintf(buf, sizeof(buf), "exponential:%g", dist.base);
      return buf;
    case DepthDistribution::Kind::half_gaussian:
      std::snprintf(buf, sizeof(buf), "half_gaussian:%g", dist.sigma);
      return buf;
    case DepthDistribution::Kind::chi_squared:
      std::snprintf(buf, sizeof(buf), "chi_squared:%g", dist.df);
      return buf;
    case DepthDistribution::Kind::range:
      std::snprintf(buf, sizeof(buf), "range:%d:%d", dist.lo, dist.hi);
      return buf;
  }
  return "unknown";
}

std::vector<double> pmf(const DepthDistribution& dist, int n_layers) {
  if (n_layers < 1) fail(ErrorCode::bad_distribution, "need at least one layer");
  std::vector<double> w(n_layers, 0.0);
  switch (dist.kind) {
    case DepthDistribution::Kind::uniform:
      for (int k = 1; k <= n_layers; ++k) w[k - 1] = 1.0;
      break;
    case DepthDistribution::Kind::exponential:
      for (int k = 1; k <= n_layers; ++k) w[k - 1] = std::pow(dist.base, k - 1);
      break;
    case DepthDistribution::Kind::half_gaussian:
      for (int k = 1; k <= n_layers; ++k)
        w[k - 1] = std::exp(-(k - 1.0) * (k - 1.0) / (2.0 * dist.sigma * dist.sigma));
      break;
    case DepthDistribution::Kind::chi_squared:
      for (int k = 1; k <= n_layers; ++k)
        w[k - 1] = std::pow(k, dist.df / 2.0 - 1.0) * std::exp(-k / 2.0);
      break;
    case DepthDistribution::Kind::range: {
      int lo = std::max(dist.lo, 1);
      int hi = std::min(dist.hi, n_layers);
      if (lo > hi)
        fail(ErrorCode::bad_distribution, "range does not intersect [1, n_layers]");
      for (int k = lo; k <= hi; ++k) w[k - 1] = 1.0;
      break;
    }
  }
  double total = 0.0;
  for (double v : w) total += v;
  for (double& v : w) v /= total;
  return w;
}

int sample_depth(const DepthDistribution& dist, int n_layers, Rng& rng) {
  std::vector<double> p = pmf(dist, n_layers);
  double u = rng.uniform();
  double cum = 0.0;
  for (int k = 0; k < n_layers; ++k) {
    cum += p[k];
    if (u < cum) return k + 1;
  }
  return n_layers;
}

int stage_of(const DropoutSchedule& schedule, long step) {
  if (!(schedule.s1 > 0 && schedule.s2 > schedule.s1))
    fail(ErrorCode::bad_config, "schedule requires 0 < s1 < s2");
  if (step < schedule.s1) return 1;
  if (step < schedule.s2) return 2;
  return 3;
}

DepthDistribution stage_distribution(const DropoutSchedule& schedule, int stage) {
  switch (stage) {
    case 1: return DepthDistribution::uniform();
    case 2: return schedule.stage2;
    case 3: return DepthDistribution::range(1, 4);
    default: fail(ErrorCode::bad_config, "stage must be 1, 2, or 3");
  }
}

int schedule_depth(const DropoutSchedule& schedule, long step, int n_layers, Rng& rng) {
  return sample_depth(stage_distribution(schedule, stage_of(schedule, step)),
                      n_layers, rng);
}

}  // namespace mbc
