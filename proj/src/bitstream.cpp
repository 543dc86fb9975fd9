#include "mbc/bitstream.hpp"

#include "mbc/binary_io.hpp"

namespace mbc {

namespace {

class BitWriter {
 public:
  explicit BitWriter(std::vector<uint8_t>& out) : out_(out) {}

  void put(uint32_t value, int bits) {
    for (int b = bits - 1; b >= 0; --b) {
      acc_ = static_cast<uint8_t>((acc_ << 1) | ((value >> b) & 1));
      if (++filled_ == 8) {
        out_.push_back(acc_);
        acc_ = 0;
        filled_ = 0;
      }
    }
  }

  void flush() {
    if (filled_ > 0) {
      out_.push_back(static_cast<uint8_t>(acc_ << (8 - filled_)));
      acc_ = 0;
      filled_ = 0;
    }
  }

 private:
  std::vector<uint8_t>& out_;
  uint8_t acc_ = 0;
  int filled_ = 0;
};

class BitReader {
 public:
  explicit BitReader(std::span<const uint8_t> data) : data_(data) {}

  uint32_t get(int bits) {
    uint32_t value = 0;
    for (int b = 0; b < bits; ++b) {
      size_t byte = pos_ >> 3;
      int shift = 7 - static_cast<int>(pos_ & 7);
      value = (value << 1) | ((data_[byte] >> shift) & 1);
      ++pos_;
    }
    return value;
  }

 private:
  std::span<const uint8_t> data_;
  size_t pos_ = 0;
};

}  // namespace

int bits_for_codebook_size(int codebook_size) {
  if (codebook_size < 2) fail(ErrorCode::bad_config, "codebook size below 2");
  if (codebook_size > (1 << 24))
    fail(ErrorCode::bad_config, "codebook size exceeds the 24-bit code field");
  int bits = 1;
  while ((1 << bits) < codebook_size) ++bits;
  return bits;
}

std::vector<uint8_t> pack(const StreamHeader& header,
                          const std::vector<CodeFrame>& frames) {
  if (header.total_codebooks < 2)
    fail(ErrorCode::bad_config, "need a semantic and at least one acoustic stream");
  if (header.bits_per_code < 1 || header.bits_per_code > 24)
    fail(ErrorCode::bad_config, "unsupported code width");

  int acoustic = header.total_codebooks - 1;
  uint32_t limit = 1u << header.bits_per_code;
  for (const CodeFrame& frame : frames) {
    if (static_cast<int>(frame.acoustic_codes.size()) != acoustic)
      fail(ErrorCode::depth_mismatch, "frame does not carry every acoustic code");
    if (frame.semantic_code < 0 ||
        static_cast<uint32_t>(frame.semantic_code) >= limit)
      fail(ErrorCode::code_out_of_range, "semantic code exceeds field width");
    for (int code : frame.acoustic_codes)
      if (code < 0 || static_cast<uint32_t>(code) >= limit)
        fail(ErrorCode::code_out_of_range, "acoustic code exceeds field width");
  }

  ByteWriter head;
  head.magic("MBC1");
  head.u8(header.version);
  head.u32(header.sample_rate);
  head.u16(header.frame_rate);
  head.u8(header.total_codebooks);
  head.u8(header.bits_per_code);
  head.u32(static_cast<uint32_t>(frames.size()));
  head.u8(header.pqmf_bands);
  head.u8(header.flags);

  std::vector<uint8_t> out = head.take();
  BitWriter bits(out);
  for (const CodeFrame& frame : frames) {
    bits.put(static_cast<uint32_t>(frame.semantic_code), header.bits_per_code);
    for (int code : frame.acoustic_codes)
      bits.put(static_cast<uint32_t>(code), header.bits_per_code);
  }
  bits.flush();
  return out;
}

std::pair<StreamHeader, std::vector<CodeFrame>> unpack(std::span<const uint8_t> data) {
  ByteReader in(data);
  if (!in.try_magic("MBC1")) fail(ErrorCode::not_a_stream, "missing stream magic");
  if (data.size() < kStreamHeaderBytes)
    fail(ErrorCode::corrupt_stream, "incomplete header");

  StreamHeader header;
  header.version = in.u8();
  if (header.version != kStreamVersion)
    fail(ErrorCode::not_a_stream, "unsupported stream version");
  header.sample_rate = in.u32();
  header.frame_rate = in.u16();
  header.total_codebooks = in.u8();
  header.bits_per_code = in.u8();
  header.num_frames = in.u32();
  header.pqmf_bands = in.u8();
  header.flags = in.u8();
  if (header.total_codebooks < 2 || header.bits_per_code < 1 ||
      header.bits_per_code > 24)
    fail(ErrorCode::corrupt_stream, "implausible header fields");

  uint64_t total_bits = static_cast<uint64_t>(header.num_frames) *
                        header.total_codebooks * header.bits_per_code;
  uint64_t payload_bytes = (total_bits + 7) / 8;
  if (data.size() - kStreamHeaderBytes != payload_bytes)
    fail(ErrorCode::corrupt_stream, "payload size does not match header");

  BitReader bits(data.subspan(kStreamHeaderBytes));
  std::vector<CodeFrame> frames(header.num_frames);
  for (CodeFrame& frame : frames) {
    frame.semantic_code = static_cast<int>(bits.get(header.bits_per_code));
    frame.acoustic_codes.resize(header.total_codebooks - 1);
    for (int& code : frame.acoustic_codes)
      code = static_cast<int>(bits.get(header.bits_per_code));
  }
  return {header, std::move(frames)};
}

long bitrate_bps(const StreamHeader& header) {
  return static_cast<long>(header.total_codebooks) * header.bits_per_code *
         header.frame_rate;
}

double compression_ratio(const StreamHeader& header) {
  long bps = bitrate_bps(header);
  if (bps <= 0) fail(ErrorCode::bad_config, "zero coded bitrate");
  return static_cast<double>(header.sample_rate) * 16.0 / bps;
}

}  // namespace mbc
