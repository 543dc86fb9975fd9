// Serialized code stream.
//
// Layout: "MBC1" magic, version (u8), sample_rate (u32), frame_rate (u16),
// total_codebooks (u8), bits_per_code (u8), num_frames (u32), pqmf_bands
// (u8), flags (u8); all little-endian, 19 bytes total.  The payload packs
// one field of bits_per_code bits per code, frames outermost and codebooks
// innermost (semantic stream first), MSB-first, with the final byte
// zero-padded.
#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "mbc/error.hpp"
#include "mbc/quantizer.hpp"

namespace mbc {

constexpr size_t kStreamHeaderBytes = 19;
constexpr uint8_t kStreamVersion = 1;
// flags bit 0: codebooks reserve entry 0 as the zero vector.
constexpr uint8_t kStreamFlagReserveZero = 0x01;

struct StreamHeader {
  uint8_t version = kStreamVersion;
  uint32_t sample_rate = 0;
  uint16_t frame_rate = 0;
  uint8_t total_codebooks = 0;  // 1 semantic + N-1 acoustic
  uint8_t bits_per_code = 0;
  uint32_t num_frames = 0;
  uint8_t pqmf_bands = 0;
  uint8_t flags = 0;
};

// Smallest width that distinguishes codebook entries: ceil(log2 K).
int bits_for_codebook_size(int codebook_size);

// Every frame must carry total_codebooks - 1 acoustic codes (shallower
// encodes pad with code 0 before packing); codes must fit bits_per_code.
// num_frames in the returned stream is taken from frames.size().
std::vector<uint8_t> pack(const StreamHeader& header,
                          const std::vector<CodeFrame>& frames);

// Rejects foreign data (not-a-stream) and size mismatches between the
// header and the payload (corrupt-stream).
std::pair<StreamHeader, std::vector<CodeFrame>> unpack(std::span<const uint8_t> data);

// total_codebooks * bits_per_code * frame_rate, bits per second.
long bitrate_bps(const StreamHeader& header);

// 16-bit PCM rate divided by the coded rate.
double compression_ratio(const StreamHeader& header);

}  // namespace mbc
