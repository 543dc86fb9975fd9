#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "mbc/error.hpp"
#include "mbc/matrix.hpp"
#include "mbc/pipeline.hpp"
#include "mbc/pqmf.hpp"
#include "mbc/rng.hpp"
#include "mbc/wav.hpp"

using namespace mbc;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<char> slurp_bytes(const std::string& path) {
  std::string text = slurp_text(path);
  return std::vector<char>(text.begin(), text.end());
}

// Runs the installed binary with redirected streams; the exit code is the
// process status, not the shell's.
RunResult run_tool(const std::string& args) {
  const std::string cmd =
      std::string(MBCODEC_BIN) + " " + args + " >cli_out.txt 2>cli_err.txt";
  int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp_text("cli_out.txt");
  r.err = slurp_text("cli_err.txt");
  return r;
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

// Value of the first "key=..." line, up to the end of the line.
std::string kv_value(const std::string& text, const std::string& key) {
  const std::string tag = key + "=";
  size_t at = text.rfind("\n" + tag);
  at = at == std::string::npos ? (text.rfind(tag, 0) == 0 ? 0 : std::string::npos)
                               : at + 1;
  REQUIRE(at != std::string::npos);
  size_t from = at + tag.size();
  size_t to = text.find('\n', from);
  return text.substr(from, to == std::string::npos ? to : to - from);
}

// Same tone family as the library tests: band-edge carriers with slow
// amplitude modulation over a light noise floor.
std::vector<double> edge_tone_mix(Rng& rng, size_t len) {
  std::vector<double> x(len, 0.0);
  const double sr = 24000.0;
  const int base = static_cast<int>(rng.below(8));
  for (int tone = 0; tone < 3; ++tone) {
    const int band = (base + 3 * tone) % 8;
    const double offset = rng.uniform(40.0, 160.0);
    const double f =
        band % 2 == 0 ? band * 1500.0 + offset : (band + 1) * 1500.0 - offset;
    const double phase = rng.uniform(0.0, 6.283185307179586);
    const double f_am = rng.uniform(1.0, 4.0);
    for (size_t n = 0; n < len; ++n) {
      const double am = 0.6 + 0.4 * std::sin(6.283185307179586 * f_am * n / sr);
      x[n] += 0.2 * am * std::sin(6.283185307179586 * f * n / sr + phase);
    }
  }
  for (size_t n = 0; n < len; ++n) x[n] += 0.01 * rng.normal();
  return x;
}

const char* kTinyConfig =
    "# desk-scale setup for the tool tests\n"
    "sample_rate=24000\n"
    "frame_rate=50\n"
    "total_codebooks=4\n"
    "codebook_size=32\n"
    "pqmf_bands=8\n"
    "subband_coeffs=16\n"
    "\n"
    "epochs=8\n"
    "total_steps=40\n"
    "batch_frames=32\n"
    "seed=7\n";

// Corpus wavs and config shared by the workflow cases; built once.
void ensure_workshop() {
  static bool ready = [] {
    Rng rng(11);
    const size_t len = 166 * 480;
    write_wav("cli_corpus_a.wav", edge_tone_mix(rng, len), 24000);
    write_wav("cli_corpus_b.wav", edge_tone_mix(rng, len), 24000);
    std::ofstream("cli_config.txt") << kTinyConfig;
    return true;
  }();
  (void)ready;
}

}  // namespace

TEST_CASE("design writes a filter file the library reloads") {
  RunResult r = run_tool("design-pqmf --bands 8 --taps 481 --out cli_proto.txt");
  REQUIRE(r.exit_code == 0);
  CHECK(contains(r.out, "bands=8"));
  CHECK(contains(r.out, "taps=481"));
  CHECK(std::stod(kv_value(r.out, "impulse_error_db")) < -50.0);
  CHECK(std::stod(kv_value(r.out, "secondary_ratio")) < 1e-3);

  PrototypeFilter proto = load_filter_text("cli_proto.txt");
  CHECK(proto.num_bands == 8);
  CHECK(proto.taps.size() == 481);
  CHECK(std::abs(proto.cutoff - std::stod(kv_value(r.out, "cutoff"))) < 1e-8);
  std::remove("cli_proto.txt");
}

TEST_CASE("design rejects a hopeless tap budget") {
  RunResult r = run_tool("design-pqmf --bands 8 --taps 33 --out cli_junk.txt");
  CHECK(r.exit_code == 3);
  CHECK(contains(r.err, "insufficient-taps"));
}

TEST_CASE("usage errors exit with the usage code") {
  CHECK(run_tool("design-pqmf --bands 8").exit_code == 2);  // --out missing
  CHECK(run_tool("no-such-command").exit_code == 2);
  CHECK(run_tool("").exit_code == 2);  // a subcommand is required
  CHECK(run_tool("--help").exit_code == 0);
}

TEST_CASE("train, encode, decode, and eval round a wav corpus") {
  ensure_workshop();

  RunResult train = run_tool(
      "train --config cli_config.txt --input cli_corpus_a.wav "
      "--input cli_corpus_b.wav --out cli_model.bin --log cli_train.log");
  REQUIRE(train.exit_code == 0);
  CHECK(contains(train.out, "signals=2"));
  CHECK(contains(train.out, "model=cli_model.bin"));
  const std::string energies = kv_value(train.out, "residual_energy");
  CHECK(std::count(energies.begin(), energies.end(), ',') == 3);  // raw + 3 layers
  CHECK(std::stod(kv_value(train.out, "cross_matched")) >
        std::stod(kv_value(train.out, "cross_mismatched")));

  const std::string log = slurp_text("cli_train.log");
  CHECK(contains(log, "step=0 stage=1 depth="));
  CHECK(contains(log, "step=39 stage=3 depth="));
  CHECK(contains(log, "cross_layer_1="));
  CHECK(contains(log, "cross_layer_3="));

  RunResult encode = run_tool(
      "encode --model cli_model.bin --input cli_corpus_a.wav --out cli_a.mbc");
  REQUIRE(encode.exit_code == 0);
  CHECK(contains(encode.out, "frames=166"));
  CHECK(contains(encode.out, "bitrate=1000 bps"));  // 4 books x 5 bits x 50 fps

  RunResult info = run_tool("info --input cli_a.mbc");
  REQUIRE(info.exit_code == 0);
  CHECK(contains(info.out, "sample_rate=24000"));
  CHECK(contains(info.out, "total_codebooks=4"));
  CHECK(contains(info.out, "num_frames=166"));
  CHECK(contains(info.out, "duration=3.32 s"));
  CHECK(contains(info.out, "bitrate=1000 bps"));
  CHECK(contains(info.out, "compression=384.0x"));  // 24000 Hz x 16 bit / 1000 bps

  RunResult decode = run_tool(
      "decode --model cli_model.bin --input cli_a.mbc --out cli_a_out.wav");
  REQUIRE(decode.exit_code == 0);
  CHECK(contains(decode.out, "samples=79680"));  // 166 frames x 480

  RunResult eval = run_tool(
      "eval --reference cli_corpus_a.wav --estimate cli_a_out.wav");
  REQUIRE(eval.exit_code == 0);
  CHECK(std::isfinite(std::stod(kv_value(eval.out, "si_sdr_db"))));
  CHECK(std::stod(kv_value(eval.out, "stft_distance")) > 0.0);

  RunResult self = run_tool(
      "eval --reference cli_corpus_a.wav --estimate cli_corpus_a.wav");
  REQUIRE(self.exit_code == 0);
  CHECK(kv_value(self.out, "si_sdr_db") == "100");
  CHECK(kv_value(self.out, "mel_distance") == "0");
}

TEST_CASE("training is reproducible through the tool") {
  ensure_workshop();
  REQUIRE(run_tool(
              "train --config cli_config.txt --input cli_corpus_a.wav "
              "--input cli_corpus_b.wav --out cli_model2.bin")
              .exit_code == 0);
  CHECK(slurp_bytes("cli_model.bin") == slurp_bytes("cli_model2.bin"));

  // A changed seed must change the codebooks.
  REQUIRE(run_tool(
              "train --config cli_config.txt --input cli_corpus_a.wav "
              "--input cli_corpus_b.wav --out cli_model3.bin --seed 99")
              .exit_code == 0);
  CHECK(slurp_bytes("cli_model.bin") != slurp_bytes("cli_model3.bin"));
  std::remove("cli_model2.bin");
  std::remove("cli_model3.bin");
}

TEST_CASE("shallow encodes and external semantic tracks work through the tool") {
  ensure_workshop();

  RunResult shallow = run_tool(
      "encode --model cli_model.bin --input cli_corpus_a.wav --out cli_a2.mbc "
      "--depth 2");
  REQUIRE(shallow.exit_code == 0);
  std::vector<char> full = slurp_bytes("cli_a.mbc");
  std::vector<char> cut = slurp_bytes("cli_a2.mbc");
  CHECK(full.size() == cut.size());  // zero-padded fields, not a shorter stream
  CHECK(full != cut);

  RunResult deep = run_tool(
      "encode --model cli_model.bin --input cli_corpus_a.wav --out cli_a3.mbc "
      "--depth 9");
  CHECK(deep.exit_code == 3);
  CHECK(contains(deep.err, "bad-depth"));

  Matrix features(166, 13);
  Rng rng(41);
  for (double& v : features.v) v = rng.normal();
  save_semantic_features(features, "cli_feat.bin");
  RunResult ext = run_tool(
      "encode --model cli_model.bin --input cli_corpus_a.wav --out cli_a4.mbc "
      "--semantic-features cli_feat.bin");
  CHECK(ext.exit_code == 0);
  std::remove("cli_a2.mbc");
  std::remove("cli_a3.mbc");
  std::remove("cli_a4.mbc");
  std::remove("cli_feat.bin");
}

TEST_CASE("foreign configuration files are refused") {
  ensure_workshop();
  std::ofstream("cli_bad1.txt") << kTinyConfig << "bogus_key=1\n";
  RunResult unknown = run_tool(
      "train --config cli_bad1.txt --input cli_corpus_a.wav --out cli_x.bin");
  CHECK(unknown.exit_code == 2);
  CHECK(contains(unknown.err, "unknown key 'bogus_key'"));

  std::ofstream("cli_bad2.txt") << "sample_rate\n";
  RunResult bare = run_tool(
      "train --config cli_bad2.txt --input cli_corpus_a.wav --out cli_x.bin");
  CHECK(bare.exit_code == 2);
  CHECK(contains(bare.err, "no '='"));
  std::remove("cli_bad1.txt");
  std::remove("cli_bad2.txt");
}

TEST_CASE("sample rate disagreements are refused") {
  ensure_workshop();
  Rng rng(43);
  write_wav("cli_slow.wav", edge_tone_mix(rng, 16000), 16000);
  RunResult r = run_tool(
      "train --config cli_config.txt --input cli_slow.wav --out cli_x.bin");
  CHECK(r.exit_code == 3);
  CHECK(contains(r.err, "rate-mismatch"));
  CHECK(contains(r.err, "16000"));
  std::remove("cli_slow.wav");
}

TEST_CASE("sample-depths prints the distribution next to its histogram") {
  RunResult r = run_tool(
      "sample-depths --dist exponential:0.6 --layers 3 --count 1000 --seed 1");
  REQUIRE(r.exit_code == 0);
  CHECK(contains(r.out, "depth=1 pmf=0.51020408"));
  CHECK(contains(r.out, "depth=2 pmf=0.30612245"));
  CHECK(contains(r.out, "depth=3 pmf=0.18367347"));

  long total = 0;
  std::istringstream lines(r.out);
  std::string line;
  while (std::getline(lines, line))
    total += std::stol(line.substr(line.rfind("count=") + 6));
  CHECK(total == 1000);

  RunResult bad = run_tool("sample-depths --dist exponential --layers 3");
  CHECK(bad.exit_code == 3);
  CHECK(contains(bad.err, "bad-distribution"));
}

TEST_CASE("missing files exit as runtime failures") {
  RunResult r = run_tool(
      "encode --model cli_nothere.bin --input cli_corpus_a.wav --out cli_x.mbc");
  CHECK(r.exit_code == 3);
  CHECK(contains(r.err, "io-error"));
  CHECK(run_tool("info --input cli_nothere.mbc").exit_code == 3);
}
