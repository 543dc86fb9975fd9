#include "mbc/wav.hpp"

#include <algorithm>
#include <cmath>

#include "mbc/binary_io.hpp"

namespace mbc {

WavData read_wav(const std::string& path) {
  std::vector<uint8_t> data = read_file_bytes(path);
  ByteReader in(data);
  if (!in.try_magic("RIFF")) fail(ErrorCode::not_a_stream, path + " is not RIFF");
  in.u32();  // chunk size; the data chunk is trusted instead
  if (!in.try_magic("WAVE")) fail(ErrorCode::not_a_stream, path + " is not WAVE");

  WavData wav;
  int channels = 0, bits = 0;
  bool have_fmt = false;
  size_t offset = 12;
  while (offset + 8 <= data.size()) {
    ByteReader chunk(std::span<const uint8_t>(data).subspan(offset));
    char id[4] = {static_cast<char>(chunk.u8()), static_cast<char>(chunk.u8()),
                  static_cast<char>(chunk.u8()), static_cast<char>(chunk.u8())};
    uint32_t size = chunk.u32();
    if (offset + 8 + size > data.size())
      fail(ErrorCode::corrupt_stream, "truncated chunk in " + path);

    if (std::equal(id, id + 4, "fmt ")) {
      if (size < 16) fail(ErrorCode::corrupt_stream, "short fmt chunk in " + path);
      int format = chunk.u16();
      channels = chunk.u16();
      wav.sample_rate = static_cast<int>(chunk.u32());
      chunk.u32();  // byte rate
      chunk.u16();  // block align
      bits = chunk.u16();
      if (format != 1)
        fail(ErrorCode::unsupported_format, "only PCM supported: " + path);
      have_fmt = true;
    } else if (std::equal(id, id + 4, "data")) {
      if (!have_fmt) fail(ErrorCode::corrupt_stream, "data before fmt in " + path);
      if (channels != 1)
        fail(ErrorCode::unsupported_format, "only mono supported: " + path);
      if (bits != 16)
        fail(ErrorCode::unsupported_format, "only 16-bit supported: " + path);
      size_t count = size / 2;
      wav.samples.resize(count);
      for (size_t i = 0; i < count; ++i) {
        int16_t s = static_cast<int16_t>(chunk.u16());
        wav.samples[i] = s / 32768.0;
      }
      return wav;
    }
    offset += 8 + size + (size & 1);  // chunks are word-aligned
  }
  fail(ErrorCode::corrupt_stream, "no data chunk in " + path);
}

void write_wav(const std::string& path, std::span<const double> samples,
               int sample_rate) {
  if (sample_rate <= 0) fail(ErrorCode::bad_config, "bad sample rate");
  ByteWriter out;
  uint32_t data_bytes = static_cast<uint32_t>(samples.size() * 2);
  out.magic("RIFF");
  out.u32(36 + data_bytes);
  out.magic("WAVE");
  out.magic("fmt ");
  out.u32(16);
  out.u16(1);  // PCM
  out.u16(1);  // mono
  out.u32(static_cast<uint32_t>(sample_rate));
  out.u32(static_cast<uint32_t>(sample_rate) * 2);
  out.u16(2);
  out.u16(16);
  out.magic("data");
  out.u32(data_bytes);
  for (double v : samples) {
    double scaled = std::clamp(v, -1.0, 1.0) * 32767.0;
    out.u16(static_cast<uint16_t>(static_cast<int16_t>(std::lround(scaled))));
  }
  write_file_bytes(path, out.data());
}

}  // namespace mbc
