// Vector quantization: single codebooks and residual stacks.
//
// Codebooks hold K entries of dimension D.  With reserve_zero set, entry 0
// is pinned to the zero vector and never trained; choosing it leaves the
// residual unchanged, which makes residual norms non-increasing through a
// stack and lets truncated code frames pad with zeros.
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mbc/binary_io.hpp"
#include "mbc/error.hpp"
#include "mbc/rng.hpp"

namespace mbc {

struct Codebook {
  int codebook_size = 0;  // K
  int dim = 0;            // D
  bool reserve_zero = true;
  std::vector<double> entries;  // K x D, row-major

  // Training state; empty on serialized codebooks.
  std::vector<double> ema_counts;
  std::vector<double> ema_sums;

  std::span<const double> entry(int i) const {
    return {entries.data() + static_cast<size_t>(i) * dim, static_cast<size_t>(dim)};
  }
};

struct VqResult {
  int index = 0;
  std::vector<double> quantized;
  std::vector<double> residual;
};

// Nearest entry by squared Euclidean distance; ties resolve to the lowest
// index.  Vector dimension must match the codebook.
VqResult vq_encode(const Codebook& codebook, std::span<const double> vec);

struct RvqStack {
  std::vector<Codebook> layers;

  int num_layers() const { return static_cast<int>(layers.size()); }
  int dim() const { return layers.empty() ? 0 : layers[0].dim; }
};

struct RvqEncodeResult {
  std::vector<int> codes;  // one per layer, length == depth
  // vector - rvq_decode(codes), evaluated with the same summation order as
  // rvq_decode so the identity holds bit-exactly.
  std::vector<double> final_residual;
  // depth+1 L2 norms: input first, then after each layer.
  std::vector<double> residual_norms;
};

// Quantize through the first `depth` layers (depth <= num_layers; <=0 means
// all layers).
RvqEncodeResult rvq_encode(const RvqStack& stack, std::span<const double> vec,
                           int depth = 0);

// Sum of the indexed entries, accumulated in layer order.  codes may be
// shorter than the stack; each code must be within its codebook.
std::vector<double> rvq_decode(const RvqStack& stack, std::span<const int> codes);

// One frame's code assignment: semantic stream plus acoustic residual layers.
struct CodeFrame {
  int semantic_code = 0;
  std::vector<int> acoustic_codes;
};

struct QuantizerTrainConfig {
  int codebook_size = 2048;
  int num_layers = 1;
  int epochs = 12;
  double ema_decay = 0.99;
  // Entries whose smoothed per-epoch sample count falls below this are
  // reseeded to a random corpus residual.
  double reseed_threshold = 2.0;
  bool reserve_zero = true;
};

// Per-layer seed vectors for k-means++ initialization; called with the
// 0-based layer index.  May be empty (unsupervised).
using SupervisionProvider =
    std::function<std::vector<std::vector<double>>(int layer)>;

struct LayerTrainStats {
  // Mean squared quantization error measured by the assignment pass of each
  // epoch (entries from the previous update).
  std::vector<double> epoch_errors;
  std::vector<int> epoch_reseeds;
};

struct RvqTrainResult {
  RvqStack stack;
  // Mean residual energy per vector: index 0 is the raw corpus, index k the
  // residual after layer k.
  std::vector<double> residual_energy;
  std::vector<LayerTrainStats> layer_stats;
};

// Layer-by-layer EMA k-means.  Layer k is initialized by k-means++ (over the
// supervision vectors when provided, otherwise over its residuals) and then
// smoothed toward assignment statistics for `epochs` passes; afterwards the
// corpus residuals advance through the trained layer.  Deterministic for a
// given rng.
RvqTrainResult train_codebooks(const std::vector<std::vector<double>>& corpus,
                               const QuantizerTrainConfig& config, Rng& rng,
                               const SupervisionProvider& supervision = nullptr);

// Codebook container format: "MBCB" magic, version byte, K (u16), D (u16),
// flags (bit 0 = reserve_zero), then K*D float32 entries row-major,
// little-endian.  A stack is a count byte followed by that many codebooks.
void write_codebook(ByteWriter& out, const Codebook& codebook);
Codebook read_codebook(ByteReader& in);
void write_stack(ByteWriter& out, const RvqStack& stack);
RvqStack read_stack(ByteReader& in);

void save_codebook(const Codebook& codebook, const std::string& path);
Codebook load_codebook(const std::string& path);
void save_stack(const RvqStack& stack, const std::string& path);
RvqStack load_stack(const std::string& path);

}  // namespace mbc
