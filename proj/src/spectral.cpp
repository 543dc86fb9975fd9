#include "mbc/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace mbc {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

double mel_of_hz(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }
double hz_of_mel(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }

std::string format_kv(const char* key, double value, char sep) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s=%.17g%c", key, value, sep);
  return buf;
}

}  // namespace

std::string MetricsReport::to_kv_block() const {
  return format_kv("si_sdr_db", si_sdr_db, '\n') +
         format_kv("stft_distance", stft_distance, '\n') +
         format_kv("mel_distance", mel_distance, '\n');
}

std::string MetricsReport::to_record() const {
  std::string s = format_kv("si_sdr_db", si_sdr_db, ' ') +
                  format_kv("stft_distance", stft_distance, ' ') +
                  format_kv("mel_distance", mel_distance, ' ');
  s.pop_back();
  return s;
}

void fft_in_place(std::vector<std::complex<double>>& buf) {
  size_t n = buf.size();
  if (n < 2) return;
  if ((n & (n - 1)) != 0) fail(ErrorCode::bad_config, "fft size not a power of two");

  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(buf[i], buf[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    double angle = -2.0 * kPi / static_cast<double>(len);
    std::complex<double> w_len(std::cos(angle), std::sin(angle));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t k = 0; k < len / 2; ++k) {
        std::complex<double> u = buf[i + k];
        std::complex<double> v = buf[i + k + len / 2] * w;
        buf[i + k] = u + v;
        buf[i + k + len / 2] = u - v;
        w *= w_len;
      }
    }
  }
}

std::vector<double> hann_window(int n) {
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = 0.5 - 0.5 * std::cos(2.0 * kPi * i / n);
  return w;
}

Spectrogram stft(std::span<const double> signal, int window_size, int hop,
                 int sample_rate) {
  if (!is_power_of_two(window_size))
    fail(ErrorCode::bad_config, "window size must be a power of two");
  if (hop <= 0) fail(ErrorCode::bad_config, "hop must be positive");
  if (signal.size() < static_cast<size_t>(window_size))
    fail(ErrorCode::too_short, "signal shorter than one window");

  Spectrogram spec;
  spec.window_size = window_size;
  spec.hop = hop;
  spec.sample_rate = sample_rate;
  spec.frames = (signal.size() - window_size) / hop + 1;
  spec.bins = static_cast<size_t>(window_size) / 2 + 1;
  spec.values.resize(spec.frames * spec.bins);

  std::vector<double> window = hann_window(window_size);
  std::vector<std::complex<double>> buf(window_size);
  for (size_t f = 0; f < spec.frames; ++f) {
    const double* x = signal.data() + f * hop;
    for (int n = 0; n < window_size; ++n) buf[n] = {window[n] * x[n], 0.0};
    fft_in_place(buf);
    for (size_t b = 0; b < spec.bins; ++b) spec.values[f * spec.bins + b] = buf[b];
  }
  return spec;
}

std::vector<std::vector<double>> mel_filterbank(int n_mels, int window_size,
                                                int sample_rate, double f_min,
                                                double f_max) {
  if (n_mels < 1) fail(ErrorCode::bad_config, "need at least one mel band");
  if (f_max <= 0.0) f_max = sample_rate / 2.0;
  if (f_max > sample_rate / 2.0 || f_min < 0.0 || f_min >= f_max)
    fail(ErrorCode::bad_config, "mel frequency range out of bounds");

  size_t bins = static_cast<size_t>(window_size) / 2 + 1;
  double mel_lo = mel_of_hz(f_min);
  double mel_hi = mel_of_hz(f_max);
  std::vector<double> edges(n_mels + 2);
  for (int i = 0; i < n_mels + 2; ++i)
    edges[i] = hz_of_mel(mel_lo + (mel_hi - mel_lo) * i / (n_mels + 1));

  std::vector<std::vector<double>> rows(n_mels, std::vector<double>(bins, 0.0));
  double bin_hz = static_cast<double>(sample_rate) / window_size;
  for (int m = 0; m < n_mels; ++m) {
    double left = edges[m], center = edges[m + 1], right = edges[m + 2];
    double sum = 0.0;
    for (size_t b = 0; b < bins; ++b) {
      double f = b * bin_hz;
      double w = 0.0;
      if (f > left && f < right)
        w = (f <= center) ? (f - left) / (center - left) : (right - f) / (right - center);
      rows[m][b] = w;
      sum += w;
    }
    if (sum <= 0.0)
      fail(ErrorCode::bad_config, "mel band " + std::to_string(m) + " covers no bins");
  }
  return rows;
}

MelSpectrogram mel_spectrogram(std::span<const double> signal, int n_mels,
                               int window_size, int hop, int sample_rate,
                               double f_min, double f_max) {
  Spectrogram spec = stft(signal, window_size, hop, sample_rate);
  if (f_max <= 0.0) f_max = sample_rate / 2.0;
  std::vector<std::vector<double>> bank =
      mel_filterbank(n_mels, window_size, sample_rate, f_min, f_max);

  MelSpectrogram mel;
  mel.frames = spec.frames;
  mel.n_mels = n_mels;
  mel.f_min = f_min;
  mel.f_max = f_max;
  mel.values.assign(spec.frames * n_mels, 0.0);
  std::vector<double> mag(spec.bins);
  for (size_t f = 0; f < spec.frames; ++f) {
    for (size_t b = 0; b < spec.bins; ++b) mag[b] = std::abs(spec.at(f, b));
    for (int m = 0; m < n_mels; ++m) {
      const std::vector<double>& row = bank[m];
      double acc = 0.0;
      for (size_t b = 0; b < spec.bins; ++b) acc += row[b] * mag[b];
      mel.values[f * n_mels + m] = acc;
    }
  }
  return mel;
}

double si_sdr_db(std::span<const double> reference, std::span<const double> estimate) {
  if (reference.empty()) fail(ErrorCode::empty_input, "empty reference");
  if (reference.size() != estimate.size())
    fail(ErrorCode::dim_mismatch, "reference/estimate length mismatch");

  double ref_energy = 0.0, cross = 0.0;
  for (size_t i = 0; i < reference.size(); ++i) {
    ref_energy += reference[i] * reference[i];
    cross += reference[i] * estimate[i];
  }
  if (ref_energy <= 0.0)
    fail(ErrorCode::undefined_reference, "all-zero reference");

  double alpha = cross / ref_energy;
  double target_energy = alpha * alpha * ref_energy;
  double residual_energy = 0.0;
  for (size_t i = 0; i < reference.size(); ++i) {
    double d = estimate[i] - alpha * reference[i];
    residual_energy += d * d;
  }
  if (residual_energy <= 0.0) return kSiSdrCapDb;
  if (target_energy <= 0.0) return -kSiSdrCapDb;
  double db = 10.0 * std::log10(target_energy / residual_energy);
  return std::clamp(db, -kSiSdrCapDb, kSiSdrCapDb);
}

namespace {

double log_spectral_l1(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (size_t i = 0; i < a.size(); ++i)
    acc += std::fabs(std::log(kLogFloor + a[i]) - std::log(kLogFloor + b[i]));
  return acc / a.size();
}

std::vector<double> magnitudes(const Spectrogram& spec) {
  std::vector<double> mag(spec.values.size());
  for (size_t i = 0; i < mag.size(); ++i) mag[i] = std::abs(spec.values[i]);
  return mag;
}

void check_equal_length(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) fail(ErrorCode::dim_mismatch, "signal length mismatch");
}

}  // namespace

double stft_distance(std::span<const double> reference,
                     std::span<const double> estimate, int sample_rate) {
  check_equal_length(reference, estimate);
  Spectrogram ref = stft(reference, kDistanceWindow, kDistanceHop, sample_rate);
  Spectrogram est = stft(estimate, kDistanceWindow, kDistanceHop, sample_rate);
  return log_spectral_l1(magnitudes(ref), magnitudes(est));
}

double mel_distance(std::span<const double> reference,
                    std::span<const double> estimate, int sample_rate) {
  check_equal_length(reference, estimate);
  MelSpectrogram ref = mel_spectrogram(reference, kDistanceMels, kDistanceWindow,
                                       kDistanceHop, sample_rate);
  MelSpectrogram est = mel_spectrogram(estimate, kDistanceMels, kDistanceWindow,
                                       kDistanceHop, sample_rate);
  return log_spectral_l1(ref.values, est.values);
}

}  // namespace mbc
