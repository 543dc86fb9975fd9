#include "mbc/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mbc {

namespace {

// Squared distance with early exit once the running sum exceeds `bound`.
double sq_dist_bounded(const double* a, const double* b, int dim, double bound) {
  double acc = 0.0;
  int i = 0;
  for (; i + 4 <= dim; i += 4) {
    double d0 = a[i] - b[i], d1 = a[i + 1] - b[i + 1];
    double d2 = a[i + 2] - b[i + 2], d3 = a[i + 3] - b[i + 3];
    acc += d0 * d0 + d1 * d1 + d2 * d2 + d3 * d3;
    if (acc > bound) return acc;
  }
  for (; i < dim; ++i) {
    double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

int nearest_entry(const Codebook& cb, const double* vec, double* out_dist) {
  int best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (int i = 0; i < cb.codebook_size; ++i) {
    double d = sq_dist_bounded(vec, cb.entries.data() + static_cast<size_t>(i) * cb.dim,
                               cb.dim, best_dist);
    if (d < best_dist) {
      best_dist = d;
      best = i;
    }
  }
  if (out_dist) *out_dist = best_dist;
  return best;
}

double norm_l2(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

// Weighted index pick proportional to weights[i]; uniform when all weights
// vanish.
size_t pick_weighted(const std::vector<double>& weights, Rng& rng) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (total <= 0.0) return rng.below(weights.size());
  double u = rng.uniform() * total;
  double cum = 0.0;
  for (size_t i = 0; i < weights.size(); ++i) {
    cum += weights[i];
    if (u < cum) return i;
  }
  return weights.size() - 1;
}

// k-means++ over `pool`, returning k rows.  With zero_pre_center the zero
// vector acts as an already-chosen center (it biases the first pick too).
std::vector<double> kmeans_pp(const double* pool, size_t count, int dim, int k,
                              bool zero_pre_center, Rng& rng) {
  std::vector<double> centers(static_cast<size_t>(k) * dim);
  std::vector<double> d2(count);
  if (zero_pre_center) {
    for (size_t i = 0; i < count; ++i) {
      double acc = 0.0;
      for (int j = 0; j < dim; ++j) acc += pool[i * dim + j] * pool[i * dim + j];
      d2[i] = acc;
    }
  } else {
    std::fill(d2.begin(), d2.end(), std::numeric_limits<double>::infinity());
  }

  for (int c = 0; c < k; ++c) {
    size_t pick;
    if (c == 0 && !zero_pre_center) {
      pick = rng.below(count);
    } else {
      pick = pick_weighted(d2, rng);
    }
    double* dst = centers.data() + static_cast<size_t>(c) * dim;
    std::copy_n(pool + pick * dim, dim, dst);
    for (size_t i = 0; i < count; ++i) {
      double d = sq_dist_bounded(pool + i * dim, dst, dim, d2[i]);
      if (d < d2[i]) d2[i] = d;
    }
  }
  return centers;
}

}  // namespace

VqResult vq_encode(const Codebook& codebook, std::span<const double> vec) {
  if (static_cast<int>(vec.size()) != codebook.dim)
    fail(ErrorCode::dim_mismatch, "vector dimension does not match codebook");
  if (codebook.codebook_size < 1) fail(ErrorCode::bad_config, "empty codebook");

  VqResult result;
  result.index = nearest_entry(codebook, vec.data(), nullptr);
  std::span<const double> e = codebook.entry(result.index);
  result.quantized.assign(e.begin(), e.end());
  result.residual.resize(vec.size());
  for (size_t i = 0; i < vec.size(); ++i) result.residual[i] = vec[i] - e[i];
  return result;
}

RvqEncodeResult rvq_encode(const RvqStack& stack, std::span<const double> vec,
                           int depth) {
  if (stack.num_layers() == 0) fail(ErrorCode::bad_config, "empty stack");
  if (static_cast<int>(vec.size()) != stack.dim())
    fail(ErrorCode::dim_mismatch, "vector dimension does not match stack");
  if (depth <= 0) depth = stack.num_layers();
  if (depth > stack.num_layers())
    fail(ErrorCode::bad_depth, "depth exceeds stack layers");

  RvqEncodeResult result;
  result.codes.reserve(depth);
  result.residual_norms.reserve(depth + 1);
  std::vector<double> residual(vec.begin(), vec.end());
  result.residual_norms.push_back(norm_l2(residual));
  for (int layer = 0; layer < depth; ++layer) {
    const Codebook& cb = stack.layers[layer];
    if (cb.dim != stack.dim()) fail(ErrorCode::dim_mismatch, "ragged stack");
    int idx = nearest_entry(cb, residual.data(), nullptr);
    result.codes.push_back(idx);
    std::span<const double> e = cb.entry(idx);
    for (size_t i = 0; i < residual.size(); ++i) residual[i] -= e[i];
    result.residual_norms.push_back(norm_l2(residual));
  }
  // Recompute against the decoded sum so encode/decode agree bit-exactly.
  std::vector<double> decoded = rvq_decode(stack, result.codes);
  result.final_residual.resize(vec.size());
  for (size_t i = 0; i < vec.size(); ++i)
    result.final_residual[i] = vec[i] - decoded[i];
  return result;
}

std::vector<double> rvq_decode(const RvqStack& stack, std::span<const int> codes) {
  if (stack.num_layers() == 0) fail(ErrorCode::bad_config, "empty stack");
  if (static_cast<int>(codes.size()) > stack.num_layers())
    fail(ErrorCode::bad_depth, "more codes than layers");

  std::vector<double> acc(stack.dim(), 0.0);
  for (size_t layer = 0; layer < codes.size(); ++layer) {
    const Codebook& cb = stack.layers[layer];
    int idx = codes[layer];
    if (idx < 0 || idx >= cb.codebook_size)
      fail(ErrorCode::bad_code, "code " + std::to_string(idx) + " out of range");
    std::span<const double> e = cb.entry(idx);
    for (size_t i = 0; i < acc.size(); ++i) acc[i] += e[i];
  }
  return acc;
}

RvqTrainResult train_codebooks(const std::vector<std::vector<double>>& corpus,
                               const QuantizerTrainConfig& config, Rng& rng,
                               const SupervisionProvider& supervision) {
  if (corpus.empty()) fail(ErrorCode::empty_corpus, "no training vectors");
  int dim = static_cast<int>(corpus[0].size());
  if (dim < 1) fail(ErrorCode::dim_mismatch, "zero-dimensional corpus");
  for (const auto& v : corpus)
    if (static_cast<int>(v.size()) != dim)
      fail(ErrorCode::dim_mismatch, "ragged corpus");
  if (config.codebook_size < 2) fail(ErrorCode::bad_config, "codebook size below 2");
  if (config.num_layers < 1) fail(ErrorCode::bad_config, "need at least one layer");
  if (config.epochs < 1) fail(ErrorCode::bad_config, "need at least one epoch");
  if (config.ema_decay <= 0.0 || config.ema_decay >= 1.0)
    fail(ErrorCode::bad_config, "ema decay must lie in (0, 1)");

  size_t count = corpus.size();
  int k = config.codebook_size;
  std::vector<double> residuals(count * dim);
  for (size_t i = 0; i < count; ++i)
    std::copy(corpus[i].begin(), corpus[i].end(), residuals.begin() + i * dim);

  RvqTrainResult result;
  result.residual_energy.reserve(config.num_layers + 1);
  {
    double energy = 0.0;
    for (double v : residuals) energy += v * v;
    result.residual_energy.push_back(energy / count);
  }

  for (int layer = 0; layer < config.num_layers; ++layer) {
    Codebook cb;
    cb.codebook_size = k;
    cb.dim = dim;
    cb.reserve_zero = config.reserve_zero;
    cb.entries.assign(static_cast<size_t>(k) * dim, 0.0);

    int first_free = config.reserve_zero ? 1 : 0;
    int free_entries = k - first_free;

    // Seed pool: supervision targets when provided, otherwise the residuals
    // this layer will quantize.
    std::vector<double> seed_storage;
    const double* pool = residuals.data();
    size_t pool_count = count;
    if (supervision) {
      std::vector<std::vector<double>> targets = supervision(layer);
      if (!targets.empty()) {
        seed_storage.resize(targets.size() * dim);
        for (size_t i = 0; i < targets.size(); ++i) {
          if (static_cast<int>(targets[i].size()) != dim)
            fail(ErrorCode::dim_mismatch, "supervision dimension mismatch");
          std::copy(targets[i].begin(), targets[i].end(),
                    seed_storage.begin() + i * dim);
        }
        pool = seed_storage.data();
        pool_count = targets.size();
      }
    }
    std::vector<double> seeds =
        kmeans_pp(pool, pool_count, dim, free_entries, config.reserve_zero, rng);
    std::copy(seeds.begin(), seeds.end(),
              cb.entries.begin() + static_cast<size_t>(first_free) * dim);

    cb.ema_counts.assign(k, 1.0);
    cb.ema_sums = cb.entries;

    LayerTrainStats stats;
    std::vector<double> raw_sums(static_cast<size_t>(k) * dim);
    std::vector<double> raw_counts(k);
    double decay_pow = 1.0;

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
      std::fill(raw_sums.begin(), raw_sums.end(), 0.0);
      std::fill(raw_counts.begin(), raw_counts.end(), 0.0);
      double sq_err = 0.0;
      for (size_t i = 0; i < count; ++i) {
        const double* v = residuals.data() + i * dim;
        double dist;
        int idx = nearest_entry(cb, v, &dist);
        sq_err += dist;
        raw_counts[idx] += 1.0;
        double* sum = raw_sums.data() + static_cast<size_t>(idx) * dim;
        for (int j = 0; j < dim; ++j) sum[j] += v[j];
      }
      stats.epoch_errors.push_back(sq_err / count);

      double d = config.ema_decay;
      for (int i = first_free; i < k; ++i) {
        cb.ema_counts[i] = d * cb.ema_counts[i] + (1.0 - d) * raw_counts[i];
        double* m = cb.ema_sums.data() + static_cast<size_t>(i) * dim;
        const double* s = raw_sums.data() + static_cast<size_t>(i) * dim;
        double* e = cb.entries.data() + static_cast<size_t>(i) * dim;
        for (int j = 0; j < dim; ++j) {
          m[j] = d * m[j] + (1.0 - d) * s[j];
          if (cb.ema_counts[i] > 1e-12) e[j] = m[j] / cb.ema_counts[i];
        }
      }

      // An entry is dead when its smoothed count tracks below the count a
      // hypothetical entry attracting reseed_threshold samples every epoch
      // would have by now (both curves start from the init value 1).
      decay_pow *= d;
      double threshold = decay_pow * 1.0 + (1.0 - decay_pow) * config.reseed_threshold;
      int reseeds = 0;
      for (int i = first_free; i < k; ++i) {
        if (cb.ema_counts[i] < threshold - 1e-12) {
          size_t pick = rng.below(count);
          double* e = cb.entries.data() + static_cast<size_t>(i) * dim;
          double* m = cb.ema_sums.data() + static_cast<size_t>(i) * dim;
          const double* v = residuals.data() + pick * dim;
          for (int j = 0; j < dim; ++j) {
            e[j] = v[j];
            m[j] = v[j] * threshold;
          }
          cb.ema_counts[i] = threshold;
          ++reseeds;
        }
      }
      stats.epoch_reseeds.push_back(reseeds);
    }

    // Advance residuals through the trained layer.
    double energy = 0.0;
    for (size_t i = 0; i < count; ++i) {
      double* v = residuals.data() + i * dim;
      int idx = nearest_entry(cb, v, nullptr);
      const double* e = cb.entries.data() + static_cast<size_t>(idx) * dim;
      for (int j = 0; j < dim; ++j) {
        v[j] -= e[j];
        energy += v[j] * v[j];
      }
    }
    result.residual_energy.push_back(energy / count);
    result.layer_stats.push_back(std::move(stats));
    result.stack.layers.push_back(std::move(cb));
  }
  return result;
}

void write_codebook(ByteWriter& out, const Codebook& codebook) {
  if (codebook.codebook_size < 1 || codebook.codebook_size > 0xFFFF ||
      codebook.dim < 1 || codebook.dim > 0xFFFF)
    fail(ErrorCode::bad_config, "codebook dimensions not serializable");
  out.magic("MBCB");
  out.u8(1);
  out.u16(static_cast<uint16_t>(codebook.codebook_size));
  out.u16(static_cast<uint16_t>(codebook.dim));
  out.u8(codebook.reserve_zero ? 1 : 0);
  for (double v : codebook.entries) out.f32(static_cast<float>(v));
}

Codebook read_codebook(ByteReader& in) {
  if (!in.try_magic("MBCB")) fail(ErrorCode::not_a_stream, "missing codebook magic");
  uint8_t version = in.u8();
  if (version != 1) fail(ErrorCode::corrupt_stream, "unsupported codebook version");
  Codebook cb;
  cb.codebook_size = in.u16();
  cb.dim = in.u16();
  if (cb.codebook_size < 1 || cb.dim < 1)
    fail(ErrorCode::corrupt_stream, "bad codebook dimensions");
  cb.reserve_zero = (in.u8() & 1) != 0;
  cb.entries.resize(static_cast<size_t>(cb.codebook_size) * cb.dim);
  for (double& v : cb.entries) v = in.f32();
  if (cb.reserve_zero)
    for (int j = 0; j < cb.dim; ++j)
      if (cb.entries[j] != 0.0)
        fail(ErrorCode::corrupt_stream, "reserved entry not zero");
  return cb;
}

void write_stack(ByteWriter& out, const RvqStack& stack) {
  if (stack.num_layers() > 0xFF)
    fail(ErrorCode::bad_config, "stack too deep to serialize");
  out.u8(static_cast<uint8_t>(stack.num_layers()));
  for (const Codebook& cb : stack.layers) write_codebook(out, cb);
}

RvqStack read_stack(ByteReader& in) {
  int n = in.u8();
  RvqStack stack;
  stack.layers.reserve(n);
  for (int i = 0; i < n; ++i) stack.layers.push_back(read_codebook(in));
  for (const Codebook& cb : stack.layers)
    if (cb.dim != stack.dim()) fail(ErrorCode::corrupt_stream, "ragged stack file");
  return stack;
}

void save_codebook(const Codebook& codebook, const std::string& path) {
  ByteWriter out;
  write_codebook(out, codebook);
  write_file_bytes(path, out.data());
}

Codebook load_codebook(const std::string& path) {
  std::vector<uint8_t> data = read_file_bytes(path);
  ByteReader in(data);
  return read_codebook(in);
}

void save_stack(const RvqStack& stack, const std::string& path) {
  ByteWriter out;
  write_stack(out, stack);
  write_file_bytes(path, out.data());
}

RvqStack load_stack(const std::string& path) {
  std::vector<uint8_t> data = read_file_bytes(path);
  ByteReader in(data);
  return read_stack(in);
}

}  // namespace mbc
