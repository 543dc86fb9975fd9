// Spectral analysis and waveform metrics: Hann STFT, mel spectrogram,
// scale-invariant SDR, and the log-spectral distances used as
// reconstruction losses.
#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include "mbc/error.hpp"

namespace mbc {

// Floor inside every log-magnitude computation.
constexpr double kLogFloor = 1e-5;
// SI-SDR is capped here; an exact reconstruction reports the cap.
constexpr double kSiSdrCapDb = 100.0;
// Fixed geometry of the spectral distances.
constexpr int kDistanceWindow = 1024;
constexpr int kDistanceHop = 256;
constexpr int kDistanceMels = 80;

struct Spectrogram {
  size_t frames = 0;
  size_t bins = 0;  // window_size / 2 + 1 (one-sided)
  int window_size = 0;
  int hop = 0;
  int sample_rate = 0;
  std::vector<std::complex<double>> values;  // frames x bins, row-major

  std::complex<double> at(size_t frame, size_t bin) const {
    return values[frame * bins + bin];
  }
};

struct MelSpectrogram {
  size_t frames = 0;
  int n_mels = 0;
  double f_min = 0.0;
  double f_max = 0.0;
  std::vector<double> values;  // frames x n_mels, row-major

  double at(size_t frame, int mel) const { return values[frame * n_mels + mel]; }
};

struct MetricsReport {
  double si_sdr_db = 0.0;
  double stft_distance = 0.0;
  double mel_distance = 0.0;

  std::string to_kv_block() const;  // one key=value per line
  std::string to_record() const;    // single space-separated line
};

// In-place iterative radix-2 FFT; size must be a power of two.
void fft_in_place(std::vector<std::complex<double>>& buf);

// Periodic Hann window of length n.
std::vector<double> hann_window(int n);

// Unpadded STFT: frames = floor((len - window) / hop) + 1.  window_size must
// be a power of two and hop positive; signals shorter than one window fail.
Spectrogram stft(std::span<const double> signal, int window_size, int hop,
                 int sample_rate);

// Triangular filters with centers equally spaced on the mel scale
// (2595 log10(1 + f/700)).  Rows are n_mels x bins; every row has positive sum.
std::vector<std::vector<double>> mel_filterbank(int n_mels, int window_size,
                                                int sample_rate, double f_min,
                                                double f_max);

// Mel filterbank applied to the magnitude spectrogram.  f_max <= 0 selects
// the Nyquist frequency.
MelSpectrogram mel_spectrogram(std::span<const double> signal, int n_mels,
                               int window_size, int hop, int sample_rate,
                               double f_min = 0.0, double f_max = -1.0);

// Scale-invariant SDR in dB: the estimate is projected onto the reference,
// the ratio of projection to residual energy is reported.  Invariant to
// positive or negative scaling of the estimate; clamped to +-kSiSdrCapDb.
// An all-zero reference is undefined.
double si_sdr_db(std::span<const double> reference, std::span<const double> estimate);

// Mean absolute difference of log(1e-5 + |X|) spectrograms at window 1024,
// hop 256.  Inputs must have equal length of at least one window.
double stft_distance(std::span<const double> reference,
                     std::span<const double> estimate, int sample_rate);

// Same distance on 80-band log-mel features.
double mel_distance(std::span<const double> reference,
                    std::span<const double> estimate, int sample_rate);

}  // namespace mbc
