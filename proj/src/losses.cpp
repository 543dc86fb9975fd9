#include "mbc/losses.hpp"

#include <cmath>
#include <cstdio>

#include "mbc/spectral.hpp"

namespace mbc {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

void check_columns_unit_norm(const std::vector<double>& a, int rows, int cols) {
  for (int c = 0; c < cols; ++c) {
    double acc = 0.0;
    for (int r = 0; r < rows; ++r) acc += a[static_cast<size_t>(r) * cols + c] *
                                          a[static_cast<size_t>(r) * cols + c];
    if (std::fabs(std::sqrt(acc) - 1.0) > 1e-9)
      fail(ErrorCode::bad_config, "projection column not unit norm");
  }
}

}  // namespace

Matrix dct_basis(int n) {
  Matrix basis(n, n);
  double scale0 = std::sqrt(1.0 / n);
  double scale = std::sqrt(2.0 / n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      basis.at(k, i) = (k == 0 ? scale0 : scale) *
                       std::cos(kPi * (2.0 * i + 1.0) * k / (2.0 * n));
  return basis;
}

ProjectionPair ProjectionPair::identity(int dim) {
  ProjectionPair p;
  p.code_dim = p.band_dim = p.common_dim = dim;
  p.a1.assign(static_cast<size_t>(dim) * dim, 0.0);
  for (int i = 0; i < dim; ++i) p.a1[static_cast<size_t>(i) * dim + i] = 1.0;
  p.a2 = p.a1;
  return p;
}

ProjectionPair ProjectionPair::dct(int code_dim, int band_dim, int common_dim) {
  if (common_dim < 1 || common_dim > code_dim || common_dim > band_dim)
    fail(ErrorCode::bad_config, "common dimension exceeds an input dimension");
  ProjectionPair p;
  p.code_dim = code_dim;
  p.band_dim = band_dim;
  p.common_dim = common_dim;
  Matrix b1 = dct_basis(code_dim);
  Matrix b2 = dct_basis(band_dim);
  p.a1.assign(static_cast<size_t>(code_dim) * common_dim, 0.0);
  p.a2.assign(static_cast<size_t>(band_dim) * common_dim, 0.0);
  for (int i = 0; i < code_dim; ++i)
    for (int d = 0; d < common_dim; ++d)
      p.a1[static_cast<size_t>(i) * common_dim + d] = b1.at(d, i);
  for (int i = 0; i < band_dim; ++i)
    for (int d = 0; d < common_dim; ++d)
      p.a2[static_cast<size_t>(i) * common_dim + d] = b2.at(d, i);
  return p;
}

ProjectionPair ProjectionPair::band_block_dct(int num_blocks, int block_dim,
                                              int block_index, int common_dim) {
  if (block_index < 0 || block_index >= num_blocks)
    fail(ErrorCode::bad_config, "block index out of range");
  if (common_dim < 1 || common_dim > block_dim)
    fail(ErrorCode::bad_config, "common dimension exceeds block dimension");
  ProjectionPair p;
  p.code_dim = num_blocks * block_dim;
  p.band_dim = block_dim;
  p.common_dim = common_dim;
  Matrix b = dct_basis(block_dim);
  p.a1.assign(static_cast<size_t>(p.code_dim) * common_dim, 0.0);
  p.a2.assign(static_cast<size_t>(block_dim) * common_dim, 0.0);
  for (int i = 0; i < block_dim; ++i)
    for (int d = 0; d < common_dim; ++d) {
      p.a1[static_cast<size_t>(block_index * block_dim + i) * common_dim + d] =
          b.at(d, i);
      p.a2[static_cast<size_t>(i) * common_dim + d] = b.at(d, i);
    }
  return p;
}

CosineLoss semantic_loss(const Matrix& quantized, const Matrix& target) {
  if (quantized.rows != target.rows || quantized.cols != target.cols)
    fail(ErrorCode::dim_mismatch, "semantic shapes differ");
  if (quantized.rows == 0) fail(ErrorCode::empty_input, "no semantic rows");

  double sum = 0.0;
  for (size_t r = 0; r < quantized.rows; ++r) {
    const double* q = quantized.row(r);
    const double* s = target.row(r);
    double qq = 0.0, ss = 0.0, qs = 0.0;
    for (size_t c = 0; c < quantized.cols; ++c) {
      qq += q[c] * q[c];
      ss += s[c] * s[c];
      qs += q[c] * s[c];
    }
    if (qq <= 0.0 || ss <= 0.0)
      fail(ErrorCode::degenerate_vector, "zero-norm semantic row " + std::to_string(r));
    sum += qs / std::sqrt(qq * ss);
  }
  CosineLoss out;
  out.mean_cosine = sum / quantized.rows;
  out.loss = 1.0 - out.mean_cosine;
  return out;
}

namespace {

// columns = input * a, where a is (in_dim x common), input is (T x in_dim).
Matrix project(const Matrix& input, const std::vector<double>& a, int in_dim,
               int common_dim) {
  if (static_cast<int>(input.cols) != in_dim)
    fail(ErrorCode::dim_mismatch, "projection input dimension mismatch");
  Matrix out(input.rows, common_dim);
  for (size_t t = 0; t < input.rows; ++t) {
    const double* x = input.row(t);
    double* y = out.row(t);
    for (int i = 0; i < in_dim; ++i) {
      double xi = x[i];
      if (xi == 0.0) continue;
      const double* arow = a.data() + static_cast<size_t>(i) * common_dim;
      for (int d = 0; d < common_dim; ++d) y[d] += xi * arow[d];
    }
  }
  return out;
}

}  // namespace

CosineLoss acoustic_loss(const Matrix& quantized, const Matrix& band_features,
                         const ProjectionPair& proj) {
  if (quantized.rows != band_features.rows)
    fail(ErrorCode::dim_mismatch, "time axes differ");
  if (quantized.rows == 0) fail(ErrorCode::empty_input, "no time steps");
  check_columns_unit_norm(proj.a1, proj.code_dim, proj.common_dim);
  check_columns_unit_norm(proj.a2, proj.band_dim, proj.common_dim);

  Matrix u = project(quantized, proj.a1, proj.code_dim, proj.common_dim);
  Matrix v = project(band_features, proj.a2, proj.band_dim, proj.common_dim);

  CosineLoss out;
  double sum = 0.0;
  size_t kept = 0;
  for (int d = 0; d < proj.common_dim; ++d) {
    double uu = 0.0, vv = 0.0, uv = 0.0;
    for (size_t t = 0; t < u.rows; ++t) {
      uu += u.at(t, d) * u.at(t, d);
      vv += v.at(t, d) * v.at(t, d);
      uv += u.at(t, d) * v.at(t, d);
    }
    if (uu <= 0.0 || vv <= 0.0) {
      ++out.skipped;
      continue;
    }
    sum += uv / std::sqrt(uu * vv);
    ++kept;
  }
  out.mean_cosine = kept ? sum / kept : 0.0;
  out.loss = 1.0 - out.mean_cosine;
  return out;
}

double reconstruction_loss(std::span<const double> reference,
                           std::span<const double> estimate, int sample_rate) {
  return stft_distance(reference, estimate, sample_rate) +
         mel_distance(reference, estimate, sample_rate);
}

double vq_commit_loss(const Matrix& pre_quant, const Matrix& post_quant) {
  if (pre_quant.rows != post_quant.rows || pre_quant.cols != post_quant.cols)
    fail(ErrorCode::dim_mismatch, "commit shapes differ");
  if (pre_quant.v.empty()) fail(ErrorCode::empty_input, "no elements");
  double acc = 0.0;
  for (size_t i = 0; i < pre_quant.v.size(); ++i) {
    double d = pre_quant.v[i] - post_quant.v[i];
    acc += d * d;
  }
  return acc / pre_quant.v.size();
}

std::string LossBreakdown::to_record() const {
  char buf[96];
  std::string s;
  auto kv = [&](const char* key, double value) {
    std::snprintf(buf, sizeof(buf), "%s=%.17g ", key, value);
    s += buf;
  };
  kv("gan", gan);
  kv("recon", recon);
  kv("vq", vq_commit);
  kv("seman", semantic);
  s += "acous=";
  if (acoustic_per_layer.empty()) {
    s += "-";
  } else {
    for (size_t i = 0; i < acoustic_per_layer.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", acoustic_per_layer[i]);
      s += buf;
      if (i + 1 < acoustic_per_layer.size()) s += ',';
    }
  }
  s += ' ';
  kv("total", total);
  s.pop_back();
  return s;
}

LossBreakdown total_loss(double recon, double vq_commit, double semantic,
                         std::vector<double> acoustic_per_layer) {
  LossBreakdown out;
  out.recon = recon;
  out.vq_commit = vq_commit;
  out.semantic = semantic;
  out.acoustic_per_layer = std::move(acoustic_per_layer);
  out.total = out.gan + out.recon + out.vq_commit + out.semantic;
  for (double a : out.acoustic_per_layer) out.total += a;
  return out;
}

}  // namespace mbc
