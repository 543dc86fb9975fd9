// Command-line front end: filter design, training, encode/decode, metrics,
// stream inspection, and depth-distribution sampling.
//
// Exit codes: 0 success, 2 usage or configuration error, 3 runtime failure.
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "mbc/bitstream.hpp"
#include "mbc/depth_sampler.hpp"
#include "mbc/error.hpp"
#include "mbc/kvconfig.hpp"
#include "mbc/pipeline.hpp"
#include "mbc/pqmf.hpp"
#include "mbc/wav.hpp"

namespace {

std::string read_text_file(const std::string& path) {
  std::vector<uint8_t> bytes = mbc::read_file_bytes(path);
  return std::string(bytes.begin(), bytes.end());
}

mbc::CodecConfig codec_config_from(mbc::KvReader& kv) {
  mbc::CodecConfig c;
  c.sample_rate = static_cast<int>(kv.get_long("sample_rate", c.sample_rate));
  c.frame_rate = static_cast<int>(kv.get_long("frame_rate", c.frame_rate));
  c.total_codebooks =
      static_cast<int>(kv.get_long("total_codebooks", c.total_codebooks));
  c.codebook_size = static_cast<int>(kv.get_long("codebook_size", c.codebook_size));
  c.pqmf_bands = static_cast<int>(kv.get_long("pqmf_bands", c.pqmf_bands));
  c.subband_coeffs =
      static_cast<int>(kv.get_long("subband_coeffs", c.subband_coeffs));
  c.semantic_dim = static_cast<int>(kv.get_long("semantic_dim", c.semantic_dim));
  c.pqmf_taps = static_cast<int>(kv.get_long("pqmf_taps", c.pqmf_taps));
  c.pqmf_attenuation_db =
      kv.get_double("pqmf_attenuation_db", c.pqmf_attenuation_db);
  return c;
}

mbc::TrainingConfig training_config_from(mbc::KvReader& kv) {
  mbc::TrainingConfig t;
  t.epochs = static_cast<int>(kv.get_long("epochs", t.epochs));
  t.ema_decay = kv.get_double("ema_decay", t.ema_decay);
  t.reseed_threshold = kv.get_double("reseed_threshold", t.reseed_threshold);
  t.total_steps = kv.get_long("total_steps", t.total_steps);
  t.s1_frac = kv.get_double("s1_frac", t.s1_frac);
  t.s2_frac = kv.get_double("s2_frac", t.s2_frac);
  t.stage2 = mbc::parse_distribution(
      kv.get_string("stage2_dist", mbc::to_string(t.stage2)));
  t.batch_frames = static_cast<int>(kv.get_long("batch_frames", t.batch_frames));
  t.seed = kv.get_u64("seed", t.seed);
  return t;
}

std::string join_csv(const std::vector<double>& values) {
  std::string out;
  char buf[32];
  for (size_t i = 0; i < values.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.8g", values[i]);
    if (i > 0) out += ",";
    out += buf;
  }
  return out;
}

void run_design(int bands, int taps, double attenuation, const std::string& out) {
  mbc::PrototypeFilter proto = mbc::design_prototype(bands, taps, attenuation);
  mbc::PqmfBank bank = mbc::build_bank(proto);
  mbc::save_filter_text(proto, out);
  std::printf("bands=%d\n", bands);
  std::printf("taps=%d\n", taps);
  std::printf("cutoff=%.8g\n", proto.cutoff);
  std::printf("impulse_error_db=%.4f\n", mbc::impulse_roundtrip_error_db(bank));
  std::printf("secondary_ratio=%.4g\n", mbc::product_filter_secondary_ratio(proto));
}

void run_train(const std::string& config_path, const std::vector<std::string>& inputs,
               const std::string& out, long seed_override,
               const std::string& log_path) {
  mbc::KvReader kv(read_text_file(config_path));
  mbc::CodecConfig config = codec_config_from(kv);
  mbc::TrainingConfig tcfg = training_config_from(kv);
  kv.finish();
  if (seed_override >= 0) tcfg.seed = static_cast<uint64_t>(seed_override);

  std::vector<std::vector<double>> corpus;
  size_t total_samples = 0;
  for (const std::string& path : inputs) {
    mbc::WavData wav = mbc::read_wav(path);
    if (wav.sample_rate != config.sample_rate)
      mbc::fail(mbc::ErrorCode::rate_mismatch,
                path + " has sample rate " + std::to_string(wav.sample_rate) +
                    ", config expects " + std::to_string(config.sample_rate));
    total_samples += wav.samples.size();
    corpus.push_back(std::move(wav.samples));
  }

  mbc::TrainingLog log;
  mbc::CodecModel model = mbc::train(config, corpus, tcfg, &log);
  mbc::save_model(model, out);

  std::printf("signals=%zu\n", corpus.size());
  std::printf("seconds=%.2f\n",
              static_cast<double>(total_samples) / config.sample_rate);
  std::printf("residual_energy=%s\n", join_csv(log.residual_energy).c_str());
  std::printf("cross_matched=%.6f\n", log.cross_pairing.matched_mean);
  std::printf("cross_mismatched=%.6f\n", log.cross_pairing.mismatched_mean);
  std::printf("model=%s\n", out.c_str());

  if (!log_path.empty()) {
    std::FILE* f = std::fopen(log_path.c_str(), "w");
    if (f == nullptr)
      mbc::fail(mbc::ErrorCode::io_error, "cannot write " + log_path);
    std::fprintf(f, "residual_energy=%s\n", join_csv(log.residual_energy).c_str());
    for (const mbc::TrainStepRecord& rec : log.steps)
      std::fprintf(f, "%s\n", rec.to_line().c_str());
    std::fprintf(f, "cross_matched=%.6f\n", log.cross_pairing.matched_mean);
    std::fprintf(f, "cross_mismatched=%.6f\n", log.cross_pairing.mismatched_mean);
    const mbc::Matrix& cm = log.cross_pairing.cosines;
    for (size_t l = 0; l < cm.rows; ++l) {
      std::vector<double> row(cm.row(l), cm.row(l) + cm.cols);
      std::fprintf(f, "cross_layer_%zu=%s\n", l + 1, join_csv(row).c_str());
    }
    std::fclose(f);
  }
}

void run_encode(const std::string& model_path, const std::string& input,
                const std::string& out, int depth,
                const std::string& semantic_path) {
  mbc::CodecModel model = mbc::load_model(model_path);
  mbc::WavData wav = mbc::read_wav(input);
  if (wav.sample_rate != model.config.sample_rate)
    mbc::fail(mbc::ErrorCode::rate_mismatch,
              input + " has sample rate " + std::to_string(wav.sample_rate) +
                  ", model expects " + std::to_string(model.config.sample_rate));

  mbc::Matrix external;
  const mbc::Matrix* ext = nullptr;
  if (!semantic_path.empty()) {
    external = mbc::load_semantic_features(semantic_path);
    ext = &external;
  }
  std::vector<uint8_t> stream = mbc::encode(model, wav.samples, depth, ext);
  mbc::write_file_bytes(out, stream);

  auto [header, frames] = mbc::unpack(stream);
  std::printf("frames=%u\n", header.num_frames);
  std::printf("bytes=%zu\n", stream.size());
  std::printf("bitrate=%ld bps\n", mbc::bitrate_bps(header));
}

void run_decode(const std::string& model_path, const std::string& input,
                const std::string& out) {
  mbc::CodecModel model = mbc::load_model(model_path);
  std::vector<uint8_t> stream = mbc::read_file_bytes(input);
  std::vector<double> samples = mbc::decode(model, stream);
  mbc::write_wav(out, samples, model.config.sample_rate);
  std::printf("samples=%zu\n", samples.size());
}

void run_eval(const std::string& reference, const std::string& estimate) {
  mbc::WavData ref = mbc::read_wav(reference);
  mbc::WavData est = mbc::read_wav(estimate);
  if (ref.sample_rate != est.sample_rate)
    mbc::fail(mbc::ErrorCode::rate_mismatch, "sample rates differ");
  mbc::MetricsReport report = mbc::evaluate(ref.samples, est.samples, ref.sample_rate);
  std::printf("%s", report.to_kv_block().c_str());
}

void run_info(const std::string& input) {
  std::vector<uint8_t> stream = mbc::read_file_bytes(input);
  auto [header, frames] = mbc::unpack(stream);
  std::printf("sample_rate=%u\n", header.sample_rate);
  std::printf("frame_rate=%u\n", header.frame_rate);
  std::printf("total_codebooks=%u\n", header.total_codebooks);
  std::printf("bits_per_code=%u\n", header.bits_per_code);
  std::printf("pqmf_bands=%u\n", header.pqmf_bands);
  std::printf("num_frames=%u\n", header.num_frames);
  std::printf("duration=%.2f s\n",
              static_cast<double>(header.num_frames) / header.frame_rate);
  std::printf("bitrate=%ld bps\n", mbc::bitrate_bps(header));
  std::printf("compression=%.1fx\n", mbc::compression_ratio(header));
}

void run_sample_depths(const std::string& dist_text, int layers, long count,
                       uint64_t seed) {
  mbc::DepthDistribution dist = mbc::parse_distribution(dist_text);
  std::vector<double> probs = mbc::pmf(dist, layers);
  mbc::Rng rng(seed);
  std::vector<long> hist(static_cast<size_t>(layers), 0);
  for (long i = 0; i < count; ++i)
    ++hist[static_cast<size_t>(mbc::sample_depth(dist, layers, rng)) - 1];
  for (int k = 0; k < layers; ++k)
    std::printf("depth=%d pmf=%.8f count=%ld\n", k + 1, probs[k], hist[k]);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-band residual codec tools"};
  app.require_subcommand(1);

  auto* design = app.add_subcommand("design-pqmf", "design a subband prototype filter");
  int d_bands = 8;
  int d_taps = 481;
  double d_atten = 100.0;
  std::string d_out;
  design->add_option("--bands", d_bands, "number of subbands")->required();
  design->add_option("--taps", d_taps, "prototype tap count");
  design->add_option("--attenuation", d_atten, "Kaiser stopband attenuation in dB");
  design->add_option("--out", d_out, "output filter text file")->required();
  design->callback([&] { run_design(d_bands, d_taps, d_atten, d_out); });

  auto* train = app.add_subcommand("train", "train codebooks on a wav corpus");
  std::string t_config, t_out, t_log;
  std::vector<std::string> t_inputs;
  long t_seed = -1;
  train->add_option("--config", t_config, "key=value configuration file")->required();
  train->add_option("--input", t_inputs, "training wav file (repeatable)")->required();
  train->add_option("--out", t_out, "output model file")->required();
  train->add_option("--seed", t_seed, "override the seed from the config");
  train->add_option("--log", t_log, "write per-step diagnostic records here");
  train->callback([&] { run_train(t_config, t_inputs, t_out, t_seed, t_log); });

  auto* encode = app.add_subcommand("encode", "encode a wav file to a code stream");
  std::string e_model, e_input, e_out, e_semantic;
  int e_depth = 0;
  encode->add_option("--model", e_model, "trained model file")->required();
  encode->add_option("--input", e_input, "input wav file")->required();
  encode->add_option("--out", e_out, "output stream file")->required();
  encode->add_option("--depth", e_depth, "acoustic layers to keep (0 = all)");
  encode->add_option("--semantic-features", e_semantic,
                     "external semantic feature file");
  encode->callback([&] { run_encode(e_model, e_input, e_out, e_depth, e_semantic); });

  auto* decode = app.add_subcommand("decode", "decode a code stream to a wav file");
  std::string x_model, x_input, x_out;
  decode->add_option("--model", x_model, "trained model file")->required();
  decode->add_option("--input", x_input, "input stream file")->required();
  decode->add_option("--out", x_out, "output wav file")->required();
  decode->callback([&] { run_decode(x_model, x_input, x_out); });

  auto* eval = app.add_subcommand("eval", "compare two wav files");
  std::string v_ref, v_est;
  eval->add_option("--reference", v_ref, "reference wav file")->required();
  eval->add_option("--estimate", v_est, "estimate wav file")->required();
  eval->callback([&] { run_eval(v_ref, v_est); });

  auto* info = app.add_subcommand("info", "print code stream properties");
  std::string i_input;
  info->add_option("--input", i_input, "stream file")->required();
  info->callback([&] { run_info(i_input); });

  auto* depths = app.add_subcommand("sample-depths",
                                    "sample a quantizer depth distribution");
  std::string s_dist;
  int s_layers = 8;
  long s_count = 10000;
  uint64_t s_seed = 1;
  depths->add_option("--dist", s_dist,
                     "distribution (uniform, exponential:B, half_gaussian:S, "
                     "chi_squared:DF, range:LO:HI)")
      ->required();
  depths->add_option("--layers", s_layers, "number of quantizer layers");
  depths->add_option("--count", s_count, "number of samples");
  depths->add_option("--seed", s_seed, "sampler seed");
  depths->callback([&] { run_sample_depths(s_dist, s_layers, s_count, s_seed); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  } catch (const mbc::Error& e) {
    std::fprintf(stderr, "mbcodec: %s\n", e.what());
    return e.code() == mbc::ErrorCode::bad_config ? 2 : 3;
  }
  return 0;
}
