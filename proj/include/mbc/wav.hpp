// Minimal RIFF WAVE reader/writer.  Only 16-bit PCM mono is supported;
// samples are exchanged as doubles in [-1, 1).
#pragma once

#include <span>
#include <string>
#include <vector>

#include "mbc/error.hpp"

namespace mbc {

struct WavData {
  int sample_rate = 0;
  std::vector<double> samples;
};

WavData read_wav(const std::string& path);
void write_wav(const std::string& path, std::span<const double> samples,
               int sample_rate);

}  // namespace mbc
