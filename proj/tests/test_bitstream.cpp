#include "mbc/bitstream.hpp"

#include <vector>

#include "doctest.h"
#include "mbc/error.hpp"
#include "mbc/rng.hpp"

using namespace mbc;

namespace {

StreamHeader header_for(int total_codebooks, int bits, uint16_t frame_rate) {
  StreamHeader h;
  h.sample_rate = 24000;
  h.frame_rate = frame_rate;
  h.total_codebooks = static_cast<uint8_t>(total_codebooks);
  h.bits_per_code = static_cast<uint8_t>(bits);
  h.pqmf_bands = 8;
  h.flags = kStreamFlagReserveZero;
  return h;
}

CodeFrame frame_of(int semantic, std::vector<int> acoustic) {
  CodeFrame f;
  f.semantic_code = semantic;
  f.acoustic_codes = std::move(acoustic);
  return f;
}

}  // namespace

TEST_CASE("an empty stream is exactly the 19-byte header") {
  StreamHeader h = header_for(8, 11, 25);
  std::vector<uint8_t> bytes = pack(h, {});
  CHECK(bytes.size() == kStreamHeaderBytes);

  auto [back, frames] = unpack(bytes);
  CHECK(frames.empty());
  CHECK(back.version == kStreamVersion);
  CHECK(back.sample_rate == 24000);
  CHECK(back.frame_rate == 25);
  CHECK(back.total_codebooks == 8);
  CHECK(back.bits_per_code == 11);
  CHECK(back.num_frames == 0);
  CHECK(back.pqmf_bands == 8);
  CHECK(back.flags == kStreamFlagReserveZero);
}

TEST_CASE("payload bits pack MSB first with zero padding") {
  // 11-bit codes 1365 (10101010101) and 682 (01010101010) concatenate to 22
  // alternating bits; the final byte pads with two zeros.
  StreamHeader h = header_for(2, 11, 25);
  std::vector<uint8_t> bytes = pack(h, {frame_of(1365, {682})});
  REQUIRE(bytes.size() == kStreamHeaderBytes + 3);
  CHECK(bytes[kStreamHeaderBytes + 0] == 0xAA);
  CHECK(bytes[kStreamHeaderBytes + 1] == 0xAA);
  CHECK(bytes[kStreamHeaderBytes + 2] == 0xA8);

  auto [back, frames] = unpack(bytes);
  REQUIRE(frames.size() == 1);
  CHECK(frames[0].semantic_code == 1365);
  REQUIRE(frames[0].acoustic_codes.size() == 1);
  CHECK(frames[0].acoustic_codes[0] == 682);
}

TEST_CASE("the frame count comes from the frames, not the header field") {
  StreamHeader h = header_for(2, 4, 25);
  h.num_frames = 999;
  std::vector<uint8_t> bytes = pack(h, {frame_of(1, {2}), frame_of(3, {4})});
  auto [back, frames] = unpack(bytes);
  CHECK(back.num_frames == 2);
  CHECK(frames.size() == 2);
}

TEST_CASE("random streams round-trip at every code width") {
  Rng rng(2024);
  for (int bits = 1; bits <= 16; ++bits) {
    const int n_books = 2 + static_cast<int>(rng.below(8));
    StreamHeader h = header_for(n_books, bits, 50);
    const int max_code = (1 << bits) - 1;

    std::vector<CodeFrame> frames(1 + rng.below(40));
    for (CodeFrame& f : frames) {
      f.semantic_code = static_cast<int>(rng.below(max_code + 1));
      f.acoustic_codes.resize(static_cast<size_t>(n_books) - 1);
      for (int& c : f.acoustic_codes) c = static_cast<int>(rng.below(max_code + 1));
    }

    auto [back, got] = unpack(pack(h, frames));
    CHECK(back.bits_per_code == bits);
    REQUIRE(got.size() == frames.size());
    for (size_t i = 0; i < frames.size(); ++i) {
      CHECK(got[i].semantic_code == frames[i].semantic_code);
      CHECK(got[i].acoustic_codes == frames[i].acoustic_codes);
    }
  }
}

TEST_CASE("code width covers the codebook sizes in use") {
  CHECK(bits_for_codebook_size(2) == 1);
  CHECK(bits_for_codebook_size(3) == 2);
  CHECK(bits_for_codebook_size(256) == 8);
  CHECK(bits_for_codebook_size(2048) == 11);
  CHECK_THROWS_AS(bits_for_codebook_size(1), Error);
  CHECK_THROWS_AS(bits_for_codebook_size(0), Error);
  CHECK_THROWS_AS(bits_for_codebook_size(1 << 25), Error);
}

TEST_CASE("published configurations hit their exact bitrates") {
  CHECK(bitrate_bps(header_for(8, 11, 25)) == 2200);
  CHECK(bitrate_bps(header_for(8, 11, 50)) == 4400);
  CHECK(bitrate_bps(header_for(16, 11, 25)) == 4400);
  CHECK(bitrate_bps(header_for(16, 11, 50)) == 8800);
}

TEST_CASE("compression ratio against 16-bit PCM") {
  // 24 kHz * 16 bit / 2200 bps = 174.5454...
  CHECK(compression_ratio(header_for(8, 11, 25)) ==
        doctest::Approx(174.5454545454545).epsilon(1e-12));
  CHECK(compression_ratio(header_for(16, 11, 50)) ==
        doctest::Approx(43.63636363636364).epsilon(1e-12));
}

TEST_CASE("foreign and damaged buffers are telling apart") {
  StreamHeader h = header_for(4, 9, 50);
  std::vector<CodeFrame> frames = {frame_of(5, {1, 2, 3}), frame_of(6, {4, 5, 6})};
  std::vector<uint8_t> bytes = pack(h, frames);

  {
    std::vector<uint8_t> bad = bytes;
    bad[0] = 'Z';
    CHECK_THROWS_WITH_AS(unpack(bad), doctest::Contains("not-a-stream"), Error);
  }
  {
    std::vector<uint8_t> empty;
    CHECK_THROWS_WITH_AS(unpack(empty), doctest::Contains("not-a-stream"), Error);
  }
  {
    std::vector<uint8_t> bad = bytes;
    bad[4] = 77;  // version byte
    CHECK_THROWS_WITH_AS(unpack(bad), doctest::Contains("not-a-stream"), Error);
  }
  {
    std::vector<uint8_t> bad(bytes.begin(), bytes.end() - 1);
    CHECK_THROWS_WITH_AS(unpack(bad), doctest::Contains("corrupt-stream"), Error);
  }
  {
    std::vector<uint8_t> bad = bytes;
    bad.push_back(0);
    CHECK_THROWS_WITH_AS(unpack(bad), doctest::Contains("corrupt-stream"), Error);
  }
  {
    std::vector<uint8_t> header_only(bytes.begin(),
                                     bytes.begin() + kStreamHeaderBytes);
    CHECK_THROWS_WITH_AS(unpack(header_only), doctest::Contains("corrupt-stream"),
                         Error);
  }
}

TEST_CASE("packing validates frames against the header") {
  StreamHeader h = header_for(4, 6, 50);

  // Wrong acoustic code count for the declared codebook total.
  CHECK_THROWS_WITH_AS(pack(h, {frame_of(1, {1, 2})}),
                       doctest::Contains("depth-mismatch"), Error);

  // Code too wide for 6 bits.
  CHECK_THROWS_WITH_AS(pack(h, {frame_of(64, {1, 2, 3})}),
                       doctest::Contains("code-out-of-range"), Error);
  CHECK_THROWS_WITH_AS(pack(h, {frame_of(1, {1, -1, 3})}),
                       doctest::Contains("code-out-of-range"), Error);

  StreamHeader bad = h;
  bad.total_codebooks = 1;
  CHECK_THROWS_AS(pack(bad, {}), Error);
  bad = h;
  bad.bits_per_code = 0;
  CHECK_THROWS_AS(pack(bad, {}), Error);
}
