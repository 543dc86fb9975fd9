// key=value configuration text.  '#' starts a comment, blank lines are
// skipped, each key may appear once.  Readers consume keys by name and then
// call finish(), which rejects anything left over; a misspelled key fails
// loudly instead of silently keeping its default.
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mbc/error.hpp"

namespace mbc {

std::vector<std::pair<std::string, std::string>> parse_kv_text(const std::string& text);

class KvReader {
 public:
  explicit KvReader(const std::string& text);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback);
  long get_long(const std::string& key, long fallback);
  double get_double(const std::string& key, double fallback);
  uint64_t get_u64(const std::string& key, uint64_t fallback);

  // Fails with bad-config when any key was never consumed.
  void finish() const;

 private:
  const std::string* find(const std::string& key);

  std::vector<std::pair<std::string, std::string>> pairs_;
  std::vector<bool> consumed_;
};

}  // namespace mbc
