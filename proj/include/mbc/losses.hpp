// Training objectives.  All weights are 1; the adversarial term is carried
// as an explicit zero so the total keeps its published shape:
//   total = gan + recon + vq_commit + semantic + sum(acoustic_per_layer)
#pragma once

#include <span>
#include <string>
#include <vector>

#include "mbc/error.hpp"
#include "mbc/matrix.hpp"

namespace mbc {

// Fixed projections applied before the per-dimension acoustic cosine.
// a1 maps code space (code_dim x common_dim), a2 maps subband feature space
// (band_dim x common_dim); every column has unit norm.
struct ProjectionPair {
  int code_dim = 0;
  int band_dim = 0;
  int common_dim = 0;
  std::vector<double> a1;  // code_dim x common_dim, row-major
  std::vector<double> a2;  // band_dim x common_dim, row-major

  static ProjectionPair identity(int dim);
  // Truncated orthonormal DCT-II bases on both sides.
  static ProjectionPair dct(int code_dim, int band_dim, int common_dim);
  // a1 reads one block of a stacked code vector (num_blocks blocks of
  // block_dim each) through a truncated DCT; a2 is the same DCT over the
  // band features.  Used when each layer is tied to one subband block.
  static ProjectionPair band_block_dct(int num_blocks, int block_dim,
                                       int block_index, int common_dim);
};

// Orthonormal DCT-II basis, returned as an n x n matrix whose rows are the
// basis vectors (row 0 is the scaled constant vector).
Matrix dct_basis(int n);

struct CosineLoss {
  double loss = 0.0;         // 1 - mean cosine
  double mean_cosine = 0.0;  // raw mean, reported alongside
  size_t skipped = 0;        // degenerate columns excluded from the mean
};

// Row-wise cosine between quantized semantic vectors and their targets,
// averaged over rows.  Shapes must match; an all-zero row in either input is
// degenerate.
CosineLoss semantic_loss(const Matrix& quantized, const Matrix& target);

// Column-wise cosine in the common space: compares columns of q*a1 against
// columns of h*a2 across time.  Zero-norm columns are skipped and counted;
// if every column is skipped the loss is 1 with mean_cosine 0.
CosineLoss acoustic_loss(const Matrix& quantized, const Matrix& band_features,
                         const ProjectionPair& proj);

// stft_distance + mel_distance of the two waveforms.
double reconstruction_loss(std::span<const double> reference,
                           std::span<const double> estimate, int sample_rate);

// Mean squared difference between pre- and post-quantization features.
double vq_commit_loss(const Matrix& pre_quant, const Matrix& post_quant);

struct LossBreakdown {
  double gan = 0.0;  // no adversarial term in this implementation
  double recon = 0.0;
  double vq_commit = 0.0;
  double semantic = 0.0;
  std::vector<double> acoustic_per_layer;
  double total = 0.0;

  // Single-line machine-readable record (key=value pairs).
  std::string to_record() const;
};

LossBreakdown total_loss(double recon, double vq_commit, double semantic,
                         std::vector<double> acoustic_per_layer);

}  // namespace mbc
