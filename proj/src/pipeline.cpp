// Codec assembly; the latent layout is described in the header.
#include "mbc/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstring>
#include <utility>

#include "mbc/rng.hpp"

namespace mbc {

namespace {

int next_pow2(int n) {
  int p = 1;
  while (p < n) p *= 2;
  return p;
}

// First `keep` rows of the orthonormal DCT-II basis on R^n.
Matrix truncated_dct(int n, int keep) {
  Matrix basis = dct_basis(n);
  Matrix out(static_cast<size_t>(keep), static_cast<size_t>(n));
  for (int r = 0; r < keep; ++r)
    for (int c = 0; c < n; ++c) out.at(r, c) = basis.at(r, c);
  return out;
}

// Mel cepstrum of one hop-length frame.  Silence maps to the exact zero
// vector because the mel energies pass through log(1 + e / floor).
class SemanticExtractor {
 public:
  SemanticExtractor(const CodecConfig& config)
      : hop_(config.hop()),
        fft_size_(next_pow2(config.hop())),
        out_dim_(config.semantic_dim),
        window_(hann_window(config.hop())),
        mel_(mel_filterbank(kSemanticMels, fft_size_, config.sample_rate, 0.0,
                            config.sample_rate / 2.0)),
        dct_(truncated_dct(kSemanticMels, config.semantic_dim)) {}

  std::vector<double> compute(std::span<const double> frame) const {
    std::vector<std::complex<double>> buf(static_cast<size_t>(fft_size_));
    for (int n = 0; n < hop_; ++n) buf[n] = frame[n] * window_[n];
    fft_in_place(buf);

    const size_t bins = static_cast<size_t>(fft_size_) / 2 + 1;
    std::vector<double> mags(bins);
    for (size_t b = 0; b < bins; ++b) mags[b] = std::abs(buf[b]);

    std::vector<double> feat(kSemanticMels);
    for (int m = 0; m < kSemanticMels; ++m) {
      double e = 0.0;
      for (size_t b = 0; b < bins; ++b) e += mel_[m][b] * mags[b];
      feat[m] = std::log(1.0 + e / kLogFloor);
    }

    std::vector<double> ceps(static_cast<size_t>(out_dim_));
    for (int i = 0; i < out_dim_; ++i) {
      double acc = 0.0;
      for (int m = 0; m < kSemanticMels; ++m) acc += dct_.at(i, m) * feat[m];
      ceps[i] = acc;
    }
    return ceps;
  }

 private:
  int hop_;
  int fft_size_;
  int out_dim_;
  std::vector<double> window_;
  std::vector<std::vector<double>> mel_;
  Matrix dct_;
};

std::vector<double> decode_prefix(const RvqStack& stack,
                                  const std::vector<int>& codes, int depth) {
  std::span<const int> head(codes.data(), static_cast<size_t>(depth));
  return rvq_decode(stack, head);
}

double row_norm(const Matrix& m, size_t r) {
  double acc = 0.0;
  for (size_t c = 0; c < m.cols; ++c) acc += m.at(r, c) * m.at(r, c);
  return std::sqrt(acc);
}

}  // namespace

void CodecConfig::validate() const {
  if (sample_rate <= 0 || frame_rate <= 0)
    fail(ErrorCode::bad_config, "sample rate and frame rate must be positive");
  if (sample_rate % frame_rate != 0)
    fail(ErrorCode::bad_config, "sample rate must be a multiple of the frame rate");
  if (pqmf_bands < 2) fail(ErrorCode::bad_config, "need at least 2 subbands");
  if (hop() % pqmf_bands != 0)
    fail(ErrorCode::bad_config, "frame hop must be a multiple of the band count");
  if (subband_coeffs < 1)
    fail(ErrorCode::bad_config, "need at least one coefficient per band");
  if (band_frame() < subband_coeffs)
    fail(ErrorCode::bad_config,
         "subband frame is shorter than the kept coefficient count");
  if (total_codebooks < 2)
    fail(ErrorCode::bad_config, "need a semantic codebook and at least one acoustic layer");
  if (semantic_dim < 1 || semantic_dim > kSemanticMels)
    fail(ErrorCode::bad_config, "semantic dimension must lie in [1, 40]");
  bits_for_codebook_size(codebook_size);  // validates the range
  if (pqmf_taps < 2 * pqmf_bands)
    fail(ErrorCode::bad_config, "prototype needs more taps than two bands' worth");
}

CodecModel make_model(const CodecConfig& config) {
  config.validate();
  CodecModel model;
  model.config = config;
  model.pqmf = build_bank(design_prototype(config.pqmf_bands, config.pqmf_taps,
                                           config.pqmf_attenuation_db));
  model.projections.reserve(static_cast<size_t>(config.acoustic_layers()));
  for (int l = 0; l < config.acoustic_layers(); ++l)
    model.projections.push_back(ProjectionPair::band_block_dct(
        config.pqmf_bands, config.subband_coeffs, model.band_of_layer(l),
        config.subband_coeffs));
  return model;
}

std::vector<LatentFrame> extract_latents(const CodecModel& model,
                                         std::span<const double> signal) {
  const CodecConfig& cfg = model.config;
  if (signal.empty()) fail(ErrorCode::empty_input, "empty signal");
  const int hop = cfg.hop();
  const size_t frames = signal.size() / static_cast<size_t>(hop);
  if (frames == 0)
    fail(ErrorCode::too_short, "signal is shorter than one frame hop");

  const size_t used = frames * static_cast<size_t>(hop);
  SubbandSignal sub = analyze(model.pqmf, signal.subspan(0, used));

  const int lb = cfg.band_frame();
  const int c = cfg.subband_coeffs;
  Matrix band_dct = truncated_dct(lb, c);
  SemanticExtractor sem(cfg);

  std::vector<LatentFrame> out(frames);
  for (size_t f = 0; f < frames; ++f) {
    LatentFrame& lf = out[f];
    lf.z.resize(static_cast<size_t>(cfg.latent_dim()));
    for (int b = 0; b < cfg.pqmf_bands; ++b) {
      const std::vector<double>& band = sub.bands[b];
      for (int i = 0; i < c; ++i) {
        double acc = 0.0;
        for (int n = 0; n < lb; ++n)
          acc += band_dct.at(i, n) * band[f * static_cast<size_t>(lb) + n];
        lf.z[static_cast<size_t>(b) * c + i] = acc;
      }
    }
    lf.s = sem.compute(signal.subspan(f * static_cast<size_t>(hop),
                                      static_cast<size_t>(hop)));
  }
  return out;
}

std::vector<double> invert_latents(const CodecModel& model,
                                   const std::vector<std::vector<double>>& z_frames) {
  const CodecConfig& cfg = model.config;
  if (z_frames.empty()) fail(ErrorCode::empty_input, "no latent frames");
  const int lb = cfg.band_frame();
  const int c = cfg.subband_coeffs;
  const size_t frames = z_frames.size();
  Matrix band_dct = truncated_dct(lb, c);

  SubbandSignal sub;
  sub.source_length = frames * static_cast<size_t>(cfg.hop());
  sub.bands.assign(static_cast<size_t>(cfg.pqmf_bands),
                   std::vector<double>(frames * static_cast<size_t>(lb), 0.0));
  for (size_t f = 0; f < frames; ++f) {
    const std::vector<double>& z = z_frames[f];
    if (z.size() != static_cast<size_t>(cfg.latent_dim()))
      fail(ErrorCode::dim_mismatch, "latent frame has the wrong dimension");
    for (int b = 0; b < cfg.pqmf_bands; ++b)
      for (int n = 0; n < lb; ++n) {
        double acc = 0.0;
        for (int i = 0; i < c; ++i)
          acc += band_dct.at(i, n) * z[static_cast<size_t>(b) * c + i];
        sub.bands[b][f * static_cast<size_t>(lb) + n] = acc;
      }
  }

  std::vector<double> full = synthesize(model.pqmf, sub);
  const size_t delay = static_cast<size_t>(model.pqmf.group_delay);
  const size_t want = frames * static_cast<size_t>(cfg.hop());
  std::vector<double> out(want);
  std::copy_n(full.begin() + delay, want, out.begin());
  return out;
}

StreamHeader make_header(const CodecConfig& config, uint32_t num_frames) {
  StreamHeader h;
  h.version = kStreamVersion;
  h.sample_rate = static_cast<uint32_t>(config.sample_rate);
  h.frame_rate = static_cast<uint16_t>(config.frame_rate);
  h.total_codebooks = static_cast<uint8_t>(config.total_codebooks);
  h.bits_per_code = static_cast<uint8_t>(bits_for_codebook_size(config.codebook_size));
  h.num_frames = num_frames;
  h.pqmf_bands = static_cast<uint8_t>(config.pqmf_bands);
  h.flags = kStreamFlagReserveZero;
  return h;
}

std::vector<uint8_t> encode(const CodecModel& model, std::span<const double> signal,
                            int depth, const Matrix* external_semantic) {
  if (!model.trained)
    fail(ErrorCode::model_not_ready, "encode requires a trained model");
  const CodecConfig& cfg = model.config;
  const int n_acoustic = cfg.acoustic_layers();
  if (depth <= 0) depth = n_acoustic;
  if (depth > n_acoustic)
    fail(ErrorCode::bad_depth, "depth exceeds the acoustic layer count");

  std::vector<LatentFrame> lat = extract_latents(model, signal);
  if (external_semantic != nullptr &&
      (external_semantic->rows != lat.size() ||
       external_semantic->cols != static_cast<size_t>(cfg.semantic_dim)))
    fail(ErrorCode::dim_mismatch,
         "external semantic features do not match the frame grid");

  std::vector<CodeFrame> frames(lat.size());
  for (size_t f = 0; f < lat.size(); ++f) {
    std::span<const double> s =
        external_semantic != nullptr
            ? std::span<const double>(external_semantic->row(f),
                                      external_semantic->cols)
            : std::span<const double>(lat[f].s);
    frames[f].semantic_code = vq_encode(model.semantic_vq, s).index;
    RvqEncodeResult enc = rvq_encode(model.acoustic_rvq, lat[f].z, depth);
    frames[f].acoustic_codes = std::move(enc.codes);
    frames[f].acoustic_codes.resize(static_cast<size_t>(n_acoustic), 0);
  }
  return pack(make_header(cfg, static_cast<uint32_t>(frames.size())), frames);
}

std::vector<double> decode(const CodecModel& model, std::span<const uint8_t> stream) {
  if (!model.trained)
    fail(ErrorCode::model_not_ready, "decode requires a trained model");
  const CodecConfig& cfg = model.config;
  auto [header, frames] = unpack(stream);
  if (header.sample_rate != static_cast<uint32_t>(cfg.sample_rate) ||
      header.frame_rate != static_cast<uint16_t>(cfg.frame_rate) ||
      header.total_codebooks != static_cast<uint8_t>(cfg.total_codebooks) ||
      header.pqmf_bands != static_cast<uint8_t>(cfg.pqmf_bands) ||
      header.bits_per_code !=
          static_cast<uint8_t>(bits_for_codebook_size(cfg.codebook_size)))
    fail(ErrorCode::config_mismatch, "stream was produced under another configuration");

  // The semantic code is carried for downstream consumers; reconstruction
  // uses the acoustic layers only.
  std::vector<std::vector<double>> zs(frames.size());
  for (size_t f = 0; f < frames.size(); ++f)
    zs[f] = rvq_decode(model.acoustic_rvq, frames[f].acoustic_codes);
  return invert_latents(model, zs);
}

MetricsReport evaluate(std::span<const double> reference,
                       std::span<const double> estimate, int sample_rate) {
  const size_t n = std::min(reference.size(), estimate.size());
  if (n == 0) fail(ErrorCode::empty_input, "nothing to evaluate");
  std::span<const double> ref = reference.subspan(0, n);
  std::span<const double> est = estimate.subspan(0, n);
  MetricsReport report;
  report.si_sdr_db = si_sdr_db(ref, est);
  report.stft_distance = stft_distance(ref, est, sample_rate);
  report.mel_distance = mel_distance(ref, est, sample_rate);
  return report;
}

std::string TrainStepRecord::to_line() const {
  char head[64];
  std::snprintf(head, sizeof(head), "step=%ld stage=%d depth=%d ", step, stage, depth);
  return std::string(head) + losses.to_record();
}

namespace {

// Shared by the training diagnostics and the cross-pairing report.
struct EncodedFrames {
  std::vector<std::vector<int>> codes;       // full-depth acoustic codes
  std::vector<std::vector<double>> sem_q;    // quantized semantic vectors
};

EncodedFrames encode_all(const CodecModel& model,
                         const std::vector<LatentFrame>& lat) {
  EncodedFrames enc;
  enc.codes.resize(lat.size());
  enc.sem_q.resize(lat.size());
  for (size_t f = 0; f < lat.size(); ++f) {
    enc.codes[f] = rvq_encode(model.acoustic_rvq, lat[f].z).codes;
    VqResult r = vq_encode(model.semantic_vq, lat[f].s);
    enc.sem_q[f] = std::move(r.quantized);
  }
  return enc;
}

Matrix band_block(const std::vector<LatentFrame>& lat, size_t f0, size_t count,
                  int band, int coeffs) {
  Matrix h(count, static_cast<size_t>(coeffs));
  for (size_t r = 0; r < count; ++r)
    for (int i = 0; i < coeffs; ++i)
      h.at(r, i) = lat[f0 + r].z[static_cast<size_t>(band) * coeffs + i];
  return h;
}

LossBreakdown batch_losses(const CodecModel& model,
                           std::span<const double> signal,
                           const std::vector<LatentFrame>& lat,
                           const EncodedFrames& enc, size_t b0, size_t batch,
                           int depth) {
  const CodecConfig& cfg = model.config;
  const size_t d_lat = static_cast<size_t>(cfg.latent_dim());
  const size_t d_sem = static_cast<size_t>(cfg.semantic_dim);

  Matrix z_true(batch, d_lat), z_hat(batch, d_lat);
  Matrix s_true(batch, d_sem), s_hat(batch, d_sem);
  for (size_t r = 0; r < batch; ++r) {
    const size_t f = b0 + r;
    std::copy_n(lat[f].z.data(), d_lat, z_true.row(r));
    std::vector<double> zq = decode_prefix(model.acoustic_rvq, enc.codes[f], depth);
    std::copy_n(zq.data(), d_lat, z_hat.row(r));
    std::copy_n(lat[f].s.data(), d_sem, s_true.row(r));
    std::copy_n(enc.sem_q[f].data(), d_sem, s_hat.row(r));
  }

  // Silent frames quantize to the zero entry on both sides; the cosine is
  // undefined there, so they sit out of the semantic term.
  size_t live = 0;
  for (size_t r = 0; r < batch; ++r)
    if (row_norm(s_true, r) > 0.0 && row_norm(s_hat, r) > 0.0) ++live;
  double semantic = 0.0;
  if (live > 0) {
    Matrix st(live, d_sem), sh(live, d_sem);
    size_t w = 0;
    for (size_t r = 0; r < batch; ++r) {
      if (row_norm(s_true, r) == 0.0 || row_norm(s_hat, r) == 0.0) continue;
      std::copy_n(s_true.row(r), d_sem, st.row(w));
      std::copy_n(s_hat.row(r), d_sem, sh.row(w));
      ++w;
    }
    semantic = semantic_loss(sh, st).loss;
  }

  double vq = vq_commit_loss(z_true, z_hat) + vq_commit_loss(s_true, s_hat);

  std::vector<double> acoustic(static_cast<size_t>(depth));
  for (int l = 0; l < depth; ++l) {
    Matrix q(batch, d_lat);
    for (size_t r = 0; r < batch; ++r) {
      std::span<const double> e =
          model.acoustic_rvq.layers[l].entry(enc.codes[b0 + r][l]);
      std::copy_n(e.data(), d_lat, q.row(r));
    }
    Matrix h = band_block(lat, b0, batch, model.band_of_layer(l), cfg.subband_coeffs);
    acoustic[static_cast<size_t>(l)] = acoustic_loss(q, h, model.projections[l]).loss;
  }

  // Reconstruction of the batch region with filter warm-up context on both
  // sides; skipped when the batch span cannot fill one distance window.
  double recon = 0.0;
  const size_t hop = static_cast<size_t>(cfg.hop());
  if (batch * hop >= static_cast<size_t>(kDistanceWindow)) {
    const size_t ctx =
        static_cast<size_t>((model.pqmf.num_taps() - 1 + cfg.hop() - 1) / cfg.hop() + 1);
    const size_t f0 = b0 > ctx ? b0 - ctx : 0;
    const size_t f1 = std::min(lat.size(), b0 + batch + ctx);
    std::vector<std::vector<double>> zs(f1 - f0);
    for (size_t f = f0; f < f1; ++f)
      zs[f - f0] = decode_prefix(model.acoustic_rvq, enc.codes[f], depth);
    std::vector<double> yhat = invert_latents(model, zs);
    std::span<const double> y(yhat.data() + (b0 - f0) * hop, batch * hop);
    std::span<const double> x = signal.subspan(b0 * hop, batch * hop);
    recon = reconstruction_loss(x, y, cfg.sample_rate);
  }

  return total_loss(recon, vq, semantic, std::move(acoustic));
}

CrossPairing cross_pairing_on_latents(const CodecModel& model,
                                      const std::vector<LatentFrame>& lat,
                                      const EncodedFrames& enc) {
  const CodecConfig& cfg = model.config;
  const int layers = std::min(cfg.acoustic_layers(), cfg.pqmf_bands);
  const int bands = cfg.pqmf_bands;
  const size_t d_lat = static_cast<size_t>(cfg.latent_dim());

  CrossPairing cp;
  cp.cosines = Matrix(static_cast<size_t>(layers), static_cast<size_t>(bands));
  double matched = 0.0, mismatched = 0.0;
  for (int l = 0; l < layers; ++l) {
    Matrix q(lat.size(), d_lat);
    for (size_t f = 0; f < lat.size(); ++f) {
      std::span<const double> e = model.acoustic_rvq.layers[l].entry(enc.codes[f][l]);
      std::copy_n(e.data(), d_lat, q.row(f));
    }
    for (int j = 0; j < bands; ++j) {
      Matrix h = band_block(lat, 0, lat.size(), j, cfg.subband_coeffs);
      const double cos = acoustic_loss(q, h, model.projections[l]).mean_cosine;
      cp.cosines.at(static_cast<size_t>(l), static_cast<size_t>(j)) = cos;
      if (j == model.band_of_layer(l))
        matched += cos;
      else
        mismatched += cos;
    }
  }
  cp.matched_mean = matched / layers;
  cp.mismatched_mean = mismatched / (static_cast<double>(layers) * (bands - 1));
  return cp;
}

}  // namespace

CodecModel train(const CodecConfig& config,
                 const std::vector<std::vector<double>>& corpus_signals,
                 const TrainingConfig& tcfg, TrainingLog* log,
                 const std::vector<const Matrix*>* external_semantic) {
  config.validate();
  if (corpus_signals.empty()) fail(ErrorCode::empty_corpus, "no training signals");
  if (external_semantic != nullptr &&
      external_semantic->size() != corpus_signals.size())
    fail(ErrorCode::dim_mismatch,
         "semantic feature list does not match the corpus");
  if (tcfg.epochs < 1 || tcfg.total_steps < 1 || tcfg.batch_frames < 1)
    fail(ErrorCode::bad_config, "training schedule fields must be positive");
  if (!(tcfg.s1_frac > 0.0) || !(tcfg.s2_frac > tcfg.s1_frac) || tcfg.s2_frac >= 1.0)
    fail(ErrorCode::bad_config, "stage fractions must satisfy 0 < s1 < s2 < 1");

  CodecModel model = make_model(config);

  std::vector<std::vector<LatentFrame>> lat(corpus_signals.size());
  size_t total_frames = 0;
  size_t longest = 0;
  for (size_t i = 0; i < corpus_signals.size(); ++i) {
    lat[i] = extract_latents(model, corpus_signals[i]);
    const Matrix* ext =
        external_semantic != nullptr ? (*external_semantic)[i] : nullptr;
    if (ext != nullptr) {
      if (ext->rows != lat[i].size() ||
          ext->cols != static_cast<size_t>(config.semantic_dim))
        fail(ErrorCode::dim_mismatch,
             "external semantic features do not match the frame grid");
      for (size_t f = 0; f < lat[i].size(); ++f)
        lat[i][f].s.assign(ext->row(f), ext->row(f) + ext->cols);
    }
    total_frames += lat[i].size();
    if (lat[i].size() > lat[longest].size()) longest = i;
  }

  const size_t needed = 10 * static_cast<size_t>(config.codebook_size);
  if (total_frames < needed) {
    char msg[128];
    std::snprintf(msg, sizeof(msg),
                  "corpus decodes to %zu frames; need at least %zu (10x codebook size)",
                  total_frames, needed);
    fail(ErrorCode::insufficient_data, msg);
  }

  std::vector<std::vector<double>> zs, ss;
  zs.reserve(total_frames);
  ss.reserve(total_frames);
  for (const std::vector<LatentFrame>& frames : lat)
    for (const LatentFrame& f : frames) {
      zs.push_back(f.z);
      ss.push_back(f.s);
    }

  Rng rng(tcfg.seed);

  QuantizerTrainConfig qsem;
  qsem.codebook_size = config.codebook_size;
  qsem.num_layers = 1;
  qsem.epochs = tcfg.epochs;
  qsem.ema_decay = tcfg.ema_decay;
  qsem.reseed_threshold = tcfg.reseed_threshold;
  qsem.reserve_zero = true;
  Rng rng_sem = rng.child(1);
  model.semantic_vq = train_codebooks(ss, qsem, rng_sem).stack.layers[0];

  QuantizerTrainConfig qac = qsem;
  qac.num_layers = config.acoustic_layers();
  // Layer seeds: the corpus latents masked down to the layer's band block.
  SupervisionProvider supervision = [&](int layer) {
    const int b = model.band_of_layer(layer);
    const size_t off = static_cast<size_t>(b) * config.subband_coeffs;
    std::vector<std::vector<double>> pool;
    for (const std::vector<double>& z : zs) {
      double norm = 0.0;
      for (int i = 0; i < config.subband_coeffs; ++i) norm += z[off + i] * z[off + i];
      if (norm == 0.0) continue;
      std::vector<double> masked(z.size(), 0.0);
      std::copy_n(z.data() + off, config.subband_coeffs, masked.data() + off);
      pool.push_back(std::move(masked));
    }
    return pool;
  };
  Rng rng_ac = rng.child(2);
  RvqTrainResult ac = train_codebooks(zs, qac, rng_ac, supervision);
  model.acoustic_rvq = std::move(ac.stack);
  model.trained = true;

  if (log != nullptr) {
    log->residual_energy = std::move(ac.residual_energy);

    const std::vector<LatentFrame>& diag = lat[longest];
    std::span<const double> diag_signal(corpus_signals[longest]);
    EncodedFrames enc = encode_all(model, diag);

    DropoutSchedule schedule;
    schedule.s1 = std::max<long>(1, std::lround(tcfg.s1_frac * tcfg.total_steps));
    schedule.s2 = std::max<long>(schedule.s1 + 1,
                                 std::lround(tcfg.s2_frac * tcfg.total_steps));
    schedule.stage2 = tcfg.stage2;

    const size_t batch = std::min<size_t>(tcfg.batch_frames, diag.size());
    const size_t starts = diag.size() - batch + 1;
    Rng rng_diag = rng.child(3);
    log->steps.reserve(static_cast<size_t>(tcfg.total_steps));
    for (long step = 0; step < tcfg.total_steps; ++step) {
      TrainStepRecord rec;
      rec.step = step;
      rec.stage = stage_of(schedule, step);
      rec.depth =
          schedule_depth(schedule, step, config.acoustic_layers(), rng_diag);
      const size_t b0 = (static_cast<size_t>(step) * batch) % starts;
      rec.losses = batch_losses(model, diag_signal, diag, enc, b0, batch, rec.depth);
      log->steps.push_back(std::move(rec));
    }

    log->cross_pairing = cross_pairing_on_latents(model, diag, enc);
  }
  return model;
}

CrossPairing cross_pairing_cosines(const CodecModel& model,
                                   std::span<const double> signal) {
  if (!model.trained)
    fail(ErrorCode::model_not_ready, "cross-pairing requires a trained model");
  std::vector<LatentFrame> lat = extract_latents(model, signal);
  EncodedFrames enc = encode_all(model, lat);
  return cross_pairing_on_latents(model, lat, enc);
}

// Model container: "MBCM" magic, version, configuration, prototype taps,
// then the semantic codebook and the acoustic stack.
void save_model(const CodecModel& model, const std::string& path) {
  ByteWriter w;
  w.magic("MBCM");
  w.u8(1);
  const CodecConfig& cfg = model.config;
  w.u32(static_cast<uint32_t>(cfg.sample_rate));
  w.u16(static_cast<uint16_t>(cfg.frame_rate));
  w.u8(static_cast<uint8_t>(cfg.total_codebooks));
  w.u32(static_cast<uint32_t>(cfg.codebook_size));
  w.u8(static_cast<uint8_t>(cfg.pqmf_bands));
  w.u16(static_cast<uint16_t>(cfg.subband_coeffs));
  w.u16(static_cast<uint16_t>(cfg.semantic_dim));
  w.u32(static_cast<uint32_t>(cfg.pqmf_taps));
  w.f64(cfg.pqmf_attenuation_db);
  w.u8(model.trained ? 1 : 0);
  w.f64(model.pqmf.prototype.cutoff);
  for (double tap : model.pqmf.prototype.taps) w.f64(tap);
  w.u64(0);  // reserved
  write_codebook(w, model.semantic_vq);
  write_stack(w, model.acoustic_rvq);
  write_file_bytes(path, w.data());
}

CodecModel load_model(const std::string& path) {
  std::vector<uint8_t> bytes = read_file_bytes(path);
  ByteReader r(bytes);
  if (!r.try_magic("MBCM")) fail(ErrorCode::not_a_stream, "not a model file");
  if (r.u8() != 1) fail(ErrorCode::corrupt_stream, "unknown model version");

  CodecConfig cfg;
  cfg.sample_rate = static_cast<int>(r.u32());
  cfg.frame_rate = r.u16();
  cfg.total_codebooks = r.u8();
  cfg.codebook_size = static_cast<int>(r.u32());
  cfg.pqmf_bands = r.u8();
  cfg.subband_coeffs = r.u16();
  cfg.semantic_dim = r.u16();
  cfg.pqmf_taps = static_cast<int>(r.u32());
  cfg.pqmf_attenuation_db = r.f64();
  const bool trained = r.u8() != 0;
  try {
    cfg.validate();
  } catch (const Error&) {
    fail(ErrorCode::corrupt_stream, "model file carries an invalid configuration");
  }

  PrototypeFilter proto;
  proto.num_bands = cfg.pqmf_bands;
  proto.num_taps = cfg.pqmf_taps;
  proto.cutoff = r.f64();
  proto.taps.resize(static_cast<size_t>(cfg.pqmf_taps));
  for (double& tap : proto.taps) tap = r.f64();
  r.u64();  // reserved

  CodecModel model;
  model.config = cfg;
  model.pqmf = build_bank(proto);
  model.semantic_vq = read_codebook(r);
  model.acoustic_rvq = read_stack(r);
  model.trained = trained;
  if (r.remaining() != 0)
    fail(ErrorCode::corrupt_stream, "trailing bytes after the model payload");

  if (model.semantic_vq.codebook_size != cfg.codebook_size ||
      model.semantic_vq.dim != cfg.semantic_dim)
    fail(ErrorCode::corrupt_stream, "semantic codebook does not match the configuration");
  if (model.acoustic_rvq.num_layers() != cfg.acoustic_layers() ||
      model.acoustic_rvq.dim() != cfg.latent_dim())
    fail(ErrorCode::corrupt_stream, "acoustic stack does not match the configuration");
  for (const Codebook& cb : model.acoustic_rvq.layers)
    if (cb.codebook_size != cfg.codebook_size)
      fail(ErrorCode::corrupt_stream, "acoustic stack does not match the configuration");

  model.projections.reserve(static_cast<size_t>(cfg.acoustic_layers()));
  for (int l = 0; l < cfg.acoustic_layers(); ++l)
    model.projections.push_back(ProjectionPair::band_block_dct(
        cfg.pqmf_bands, cfg.subband_coeffs, model.band_of_layer(l),
        cfg.subband_coeffs));
  return model;
}

void save_semantic_features(const Matrix& features, const std::string& path) {
  ByteWriter w;
  w.magic("MBSF");
  w.u32(static_cast<uint32_t>(features.rows));
  w.u16(static_cast<uint16_t>(features.cols));
  for (double x : features.v) w.f32(static_cast<float>(x));
  write_file_bytes(path, w.data());
}

Matrix load_semantic_features(const std::string& path) {
  std::vector<uint8_t> bytes = read_file_bytes(path);
  ByteReader r(bytes);
  if (!r.try_magic("MBSF")) fail(ErrorCode::not_a_stream, "not a semantic feature file");
  const uint32_t rows = r.u32();
  const uint16_t cols = r.u16();
  Matrix m(rows, cols);
  for (double& x : m.v) x = r.f32();
  if (r.remaining() != 0)
    fail(ErrorCode::corrupt_stream, "trailing bytes after the feature payload");
  return m;
}

}  // namespace mbc
