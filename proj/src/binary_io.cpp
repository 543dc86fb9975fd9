#include "mbc/binary_io.hpp"

#include <cstdio>

namespace mbc {

std::vector<uint8_t> read_file_bytes(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) fail(ErrorCode::io_error, "cannot open " + path);
  std::fseek(f, 0, SEEK_END);
  long size = std::ftell(f);
  if (size < 0) {
    std::fclose(f);
    fail(ErrorCode::io_error, "cannot stat " + path);
  }
  std::fseek(f, 0, SEEK_SET);
  std::vector<uint8_t> data(static_cast<size_t>(size));
  size_t got = size ? std::fread(data.data(), 1, data.size(), f) : 0;
  std::fclose(f);
  if (got != data.size()) fail(ErrorCode::io_error, "short read on " + path);
  return data;
}

void write_file_bytes(const std::string& path, std::span<const uint8_t> data) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) fail(ErrorCode::io_error, "cannot create " + path);
  size_t put = data.empty() ? 0 : std::fwrite(data.data(), 1, data.size(), f);
  int rc = std::fclose(f);
  if (put != data.size() || rc != 0) fail(ErrorCode::io_error, "short write on " + path);
}

}  // namespace mbc
