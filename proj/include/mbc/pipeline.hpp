// End-to-end codec: subband analysis, latent extraction, parallel
// semantic/acoustic quantization, stream packing, and training.
//
// The latent for one frame is the per-band cosine-transform block matrix
// z (pqmf_bands x subband_coeffs, band-major) of that frame's subband
// samples; the semantic target s holds mel-cepstral coefficients of the
// frame's full-band samples.  A single codebook quantizes s; a residual
// stack of total_codebooks-1 layers quantizes z, layer k supervised by
// subband ((k-1) mod pqmf_bands) + 1.  Semantic codes ride in the stream
// but reconstruction uses only the acoustic layers.
#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mbc/bitstream.hpp"
#include "mbc/depth_sampler.hpp"
#include "mbc/error.hpp"
#include "mbc/losses.hpp"
#include "mbc/matrix.hpp"
#include "mbc/pqmf.hpp"
#include "mbc/quantizer.hpp"
#include "mbc/spectral.hpp"

namespace mbc {

// Mel bands feeding the semantic cepstrum.
constexpr int kSemanticMels = 40;

struct CodecConfig {
  int sample_rate = 24000;
  int frame_rate = 50;        // frames per second
  int total_codebooks = 8;    // 1 semantic + N-1 acoustic
  int codebook_size = 2048;   // entries per codebook
  int pqmf_bands = 8;
  int subband_coeffs = 16;    // kept DCT coefficients per band and frame
  int semantic_dim = 13;
  int pqmf_taps = 481;
  double pqmf_attenuation_db = 100.0;

  int hop() const { return sample_rate / frame_rate; }
  int band_frame() const { return hop() / pqmf_bands; }
  int latent_dim() const { return pqmf_bands * subband_coeffs; }
  int acoustic_layers() const { return total_codebooks - 1; }

  void validate() const;
};

struct LatentFrame {
  std::vector<double> z;  // pqmf_bands * subband_coeffs, band-major
  std::vector<double> s;  // semantic_dim
};

struct CodecModel {
  CodecConfig config;
  PqmfBank pqmf;
  Codebook semantic_vq;
  RvqStack acoustic_rvq;
  std::vector<ProjectionPair> projections;  // one per acoustic layer
  bool trained = false;

  // 0-based subband block assigned to 0-based acoustic layer.
  int band_of_layer(int layer) const { return layer % config.pqmf_bands; }
};

// Designs the filter bank and the per-layer projections; codebooks start
// empty (the model is not ready to encode until trained).
CodecModel make_model(const CodecConfig& config);

// Frame count is floor(len / hop); trailing samples are dropped.
std::vector<LatentFrame> extract_latents(const CodecModel& model,
                                         std::span<const double> signal);

// Inverse of the latent transform: zero-padded inverse DCT per band and
// frame, then filter-bank synthesis, trimmed by the analysis-synthesis
// group delay.  Output length = frames * hop.
std::vector<double> invert_latents(const CodecModel& model,
                                   const std::vector<std::vector<double>>& z_frames);

StreamHeader make_header(const CodecConfig& config, uint32_t num_frames);

// depth <= 0 encodes through every acoustic layer; shallower depths pad the
// remaining code fields with the reserved zero entry.  external_semantic,
// when given, replaces the internally computed semantic targets (rows must
// match the frame count, columns semantic_dim).
std::vector<uint8_t> encode(const CodecModel& model, std::span<const double> signal,
                            int depth = 0, const Matrix* external_semantic = nullptr);

std::vector<double> decode(const CodecModel& model, std::span<const uint8_t> stream);

struct TrainingConfig {
  int epochs = 12;
  double ema_decay = 0.99;
  double reseed_threshold = 2.0;
  long total_steps = 200;    // diagnostic loss-schedule steps
  double s1_frac = 0.30;     // uniform warmup until s1_frac * total_steps
  double s2_frac = 0.80;     // shaped stage until s2_frac * total_steps
  DepthDistribution stage2 = DepthDistribution::half_gaussian(5.0);
  int batch_frames = 32;
  uint64_t seed = 1;
};

struct TrainStepRecord {
  long step = 0;
  int stage = 0;
  int depth = 0;
  LossBreakdown losses;

  std::string to_line() const;
};

struct CrossPairing {
  Matrix cosines;  // layers x bands, raw mean Eq-style cosine
  double matched_mean = 0.0;
  double mismatched_mean = 0.0;
};

struct TrainingLog {
  // Mean residual energy per latent vector: [0] raw, [k] after layer k.
  std::vector<double> residual_energy;
  std::vector<TrainStepRecord> steps;
  CrossPairing cross_pairing;
};

// Trains the semantic codebook on s targets and the acoustic stack on z,
// layer by layer with subband-supervised initialization, then runs the
// depth-scheduled diagnostic loss pass over the longest corpus signal.
// Deterministic for a fixed TrainingConfig::seed.  The corpus must decode
// to at least 10 * codebook_size frames.
CodecModel train(const CodecConfig& config,
                 const std::vector<std::vector<double>>& corpus_signals,
                 const TrainingConfig& tcfg, TrainingLog* log = nullptr,
                 const std::vector<const Matrix*>* external_semantic = nullptr);

// Raw cosine of every acoustic layer (up to one round of subbands) against
// every subband target on the given material.
CrossPairing cross_pairing_cosines(const CodecModel& model,
                                   std::span<const double> signal);

// Metrics on length-aligned signals (trailing samples of the longer one are
// trimmed).
MetricsReport evaluate(std::span<const double> reference,
                       std::span<const double> estimate, int sample_rate);

// Model container: "MBCM" magic, config, prototype taps, then the semantic
// codebook and acoustic stack in the codebook container format.
void save_model(const CodecModel& model, const std::string& path);
CodecModel load_model(const std::string& path);

// Semantic feature file: "MBSF" magic, u32 frame count, u16 dimension,
// float32 row-major features.
void save_semantic_features(const Matrix& features, const std::string& path);
Matrix load_semantic_features(const std::string& path);

}  // namespace mbc
