#include "mbc/pqmf.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>

namespace mbc {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

// Zeroth-order modified Bessel function, power series.
double bessel_i0(double x) {
  double sum = 1.0;
  double term = 1.0;
  double half_x = x / 2.0;
  for (int k = 1; k < 200; ++k) {
    term *= (half_x / k) * (half_x / k);
    sum += term;
    if (term < sum * 1e-18) break;
  }
  return sum;
}

double kaiser_beta(double attenuation_db) {
  if (attenuation_db > 50.0) return 0.1102 * (attenuation_db - 8.7);
  if (attenuation_db >= 21.0)
    return 0.5842 * std::pow(attenuation_db - 21.0, 0.4) + 0.07886 * (attenuation_db - 21.0);
  return 0.0;
}

// Kaiser-windowed sinc lowpass, DC gain normalized to 1.
std::vector<double> kaiser_lowpass(int num_taps, double cutoff, double beta) {
  std::vector<double> h(num_taps);
  double center = (num_taps - 1) / 2.0;
  double i0_beta = bessel_i0(beta);
  double sum = 0.0;
  for (int n = 0; n < num_taps; ++n) {
    double t = n - center;
    double sinc = (t == 0.0) ? 2.0 * cutoff
                             : std::sin(2.0 * kPi * cutoff * t) / (kPi * t);
    double frac = (num_taps > 1) ? (2.0 * n / (num_taps - 1) - 1.0) : 0.0;
    double window = bessel_i0(beta * std::sqrt(std::max(0.0, 1.0 - frac * frac))) / i0_beta;
    h[n] = sinc * window;
    sum += h[n];
  }
  for (double& v : h) v /= sum;
  return h;
}

PqmfBank bank_from_taps(std::vector<double> taps, int num_bands, double cutoff) {
  PrototypeFilter proto;
  proto.num_bands = num_bands;
  proto.num_taps = static_cast<int>(taps.size());
  proto.cutoff = cutoff;
  proto.taps = std::move(taps);
  return build_bank(proto);
}

}  // namespace

PqmfBank build_bank(const PrototypeFilter& prototype) {
  int m = prototype.num_bands;
  int len = prototype.num_taps;
  if (m < 2) fail(ErrorCode::invalid_band_count, "need at least 2 bands");
  if (len < 1 || static_cast<int>(prototype.taps.size()) != len)
    fail(ErrorCode::insufficient_taps, "prototype tap count mismatch");

  PqmfBank bank;
  bank.prototype = prototype;
  bank.decimation = m;
  bank.group_delay = len - 1;
  bank.analysis.assign(m, std::vector<double>(len));
  bank.synthesis.assign(m, std::vector<double>(len));
  for (int k = 0; k < m; ++k) {
    double phase = (k % 2 == 0) ? kPi / 4.0 : -kPi / 4.0;
    double omega = kPi / m * (k + 0.5);
    for (int n = 0; n < len; ++n)
      bank.analysis[k][n] = 2.0 * prototype.taps[n] * std::cos(omega * n + phase);
    for (int n = 0; n < len; ++n)
      bank.synthesis[k][n] = m * bank.analysis[k][len - 1 - n];
  }
  return bank;
}

SubbandSignal analyze(const PqmfBank& bank, std::span<const double> signal) {
  if (signal.empty()) fail(ErrorCode::empty_input, "analyze of empty signal");
  int m = bank.decimation;
  int len = bank.num_taps();
  size_t padded = (signal.size() + m - 1) / m * m;
  size_t band_len = (padded + len - 1 + m - 1) / m;

  SubbandSignal out;
  out.source_length = signal.size();
  out.bands.assign(m, std::vector<double>(band_len, 0.0));
  for (int k = 0; k < m; ++k) {
    const double* h = bank.analysis[k].data();
    std::vector<double>& band = out.bands[k];
    for (size_t i = 0; i < band_len; ++i) {
      // y[i] = sum_n h[n] x[i*M - n]; x is zero outside its support.
      long long pos = static_cast<long long>(i) * m;
      long long n_lo = std::max(0LL, pos - static_cast<long long>(signal.size()) + 1);
      long long n_hi = std::min(static_cast<long long>(len) - 1, pos);
      double acc = 0.0;
      for (long long n = n_lo; n <= n_hi; ++n) acc += h[n] * signal[pos - n];
      band[i] = acc;
    }
  }
  return out;
}

std::vector<double> synthesize(const PqmfBank& bank, const SubbandSignal& subbands) {
  int m = bank.decimation;
  int len = bank.num_taps();
  if (static_cast<int>(subbands.bands.size()) != m)
    fail(ErrorCode::band_mismatch, "subband count does not match bank");
  if (subbands.bands.empty() || subbands.bands[0].empty())
    fail(ErrorCode::empty_input, "synthesize of empty subbands");
  size_t band_len = subbands.bands[0].size();
  for (const auto& band : subbands.bands)
    if (band.size() != band_len) fail(ErrorCode::band_mismatch, "unequal band lengths");

  std::vector<double> out(band_len * m + len - 1, 0.0);
  for (int k = 0; k < m; ++k) {
    const double* g = bank.synthesis[k].data();
    const std::vector<double>& band = subbands.bands[k];
    for (size_t i = 0; i < band_len; ++i) {
      double v = band[i];
      if (v == 0.0) continue;
      double* dst = out.data() + i * m;
      for (int n = 0; n < len; ++n) dst[n] += g[n] * v;
    }
  }
  return out;
}

double impulse_roundtrip_error_db(const PqmfBank& bank) {
  int len = bank.num_taps();
  size_t sig_len = static_cast<size_t>(3) * len;
  std::vector<double> x(sig_len, 0.0);
  x[len] = 1.0;
  SubbandSignal bands = analyze(bank, x);
  std::vector<double> y = synthesize(bank, bands);
  int delay = bank.group_delay;
  double err = 0.0;
  for (size_t n = 0; n < sig_len; ++n) {
    double d = y[n + delay] - x[n];
    err += d * d;
  }
  return 10.0 * std::log10(std::max(err, 1e-300));
}

double product_filter_secondary_ratio(const PrototypeFilter& prototype) {
  const std::vector<double>& h = prototype.taps;
  int len = prototype.num_taps;
  int stride = 2 * prototype.num_bands;
  // F = h * reverse(h) is the autocorrelation of a symmetric filter; sample
  // it at lags that are multiples of 2M.  F[center] is the largest tap.
  double center = 0.0;
  for (int n = 0; n < len; ++n) center += h[n] * h[n];
  double second = 0.0;
  for (int lag = stride; lag < len; lag += stride) {
    double acc = 0.0;
    for (int n = 0; n + lag < len; ++n) acc += h[n] * h[n + lag];
    second = std::max(second, std::fabs(acc));
  }
  return second / center;
}

PrototypeFilter design_prototype(int num_bands, int num_taps,
                                 double target_attenuation_db) {
  if (num_bands < 2) fail(ErrorCode::invalid_band_count, "need at least 2 bands");
  if (num_taps < 8 * num_bands)
    fail(ErrorCode::insufficient_taps, "tap count below 8 per band");

  double beta = kaiser_beta(target_attenuation_db);
  double nominal = 1.0 / (4.0 * num_bands);
  double lo = 0.5 * nominal;
  double hi = 1.5 * nominal;

  auto objective = [&](double cutoff) {
    PqmfBank bank = bank_from_taps(kaiser_lowpass(num_taps, cutoff, beta),
                                   num_bands, cutoff);
    return impulse_roundtrip_error_db(bank);
  };

  // Golden-section search; the error is unimodal in the cutoff around 1/(4M).
  const double inv_phi = 0.61803398874989484820;
  double a = lo, b = hi;
  double c = b - (b - a) * inv_phi;
  double d = a + (b - a) * inv_phi;
  double fc = objective(c), fd = objective(d);
  for (int it = 0; it < 60; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - (b - a) * inv_phi;
      fc = objective(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + (b - a) * inv_phi;
      fd = objective(d);
    }
  }
  double best_cutoff = (fc < fd) ? c : d;

  PrototypeFilter proto;
  proto.num_bands = num_bands;
  proto.num_taps = num_taps;
  proto.cutoff = best_cutoff;
  proto.taps = kaiser_lowpass(num_taps, best_cutoff, beta);

  double err_db = impulse_roundtrip_error_db(build_bank(proto));
  if (err_db > -40.0 || product_filter_secondary_ratio(proto) >= 1e-3)
    fail(ErrorCode::insufficient_taps,
         "achieved reconstruction error " + std::to_string(err_db) + " dB");
  return proto;
}

void save_filter_text(const PrototypeFilter& prototype, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) fail(ErrorCode::io_error, "cannot create " + path);
  std::fprintf(f, "M=%d L=%d fc=%.17g\n", prototype.num_bands, prototype.num_taps,
               prototype.cutoff);
  for (double tap : prototype.taps) std::fprintf(f, "%.17g\n", tap);
  if (std::fclose(f) != 0) fail(ErrorCode::io_error, "short write on " + path);
}

PrototypeFilter load_filter_text(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "r");
  if (!f) fail(ErrorCode::io_error, "cannot open " + path);
  PrototypeFilter proto;
  if (std::fscanf(f, "M=%d L=%d fc=%lg\n", &proto.num_bands, &proto.num_taps,
                  &proto.cutoff) != 3) {
    std::fclose(f);
    fail(ErrorCode::corrupt_stream, "bad filter header in " + path);
  }
  if (proto.num_bands < 2 || proto.num_taps < 1) {
    std::fclose(f);
    fail(ErrorCode::corrupt_stream, "bad filter dimensions in " + path);
  }
  proto.taps.resize(proto.num_taps);
  for (int n = 0; n < proto.num_taps; ++n) {
    if (std::fscanf(f, "%lg\n", &proto.taps[n]) != 1) {
      std::fclose(f);
      fail(ErrorCode::corrupt_stream, "truncated filter file " + path);
    }
  }
  std::fclose(f);
  return proto;
}

}  // namespace mbc
