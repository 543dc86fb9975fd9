#include "mbc/kvconfig.hpp"

#include <cerrno>
#include <cstdlib>

namespace mbc {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

std::vector<std::pair<std::string, std::string>> parse_kv_text(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> pairs;
  size_t pos = 0;
  int line_no = 0;
  while (pos <= text.size()) {
    size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;

    size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;

    size_t eq = line.find('=');
    if (eq == std::string::npos)
      fail(ErrorCode::bad_config,
           "line " + std::to_string(line_no) + " has no '='");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      fail(ErrorCode::bad_config,
           "line " + std::to_string(line_no) + " has an empty key");
    if (value.empty())
      fail(ErrorCode::bad_config, "key '" + key + "' has an empty value");
    for (const auto& [seen, unused] : pairs)
      if (seen == key) fail(ErrorCode::bad_config, "duplicate key '" + key + "'");
    pairs.emplace_back(std::move(key), std::move(value));
  }
  return pairs;
}

KvReader::KvReader(const std::string& text)
    : pairs_(parse_kv_text(text)), consumed_(pairs_.size(), false) {}

const std::string* KvReader::find(const std::string& key) {
  for (size_t i = 0; i < pairs_.size(); ++i)
    if (pairs_[i].first == key) {
      consumed_[i] = true;
      return &pairs_[i].second;
    }
  return nullptr;
}

bool KvReader::has(const std::string& key) const {
  for (const auto& [k, unused] : pairs_)
    if (k == key) return true;
  return false;
}

std::string KvReader::get_string(const std::string& key, const std::string& fallback) {
  const std::string* v = find(key);
  return v != nullptr ? *v : fallback;
}

long KvReader::get_long(const std::string& key, long fallback) {
  const std::string* v = find(key);
  if (v == nullptr) return fallback;
  errno = 0;
  char* end = nullptr;
  long out = std::strtol(v->c_str(), &end, 10);
  if (errno != 0 || end == v->c_str() || *end != '\0')
    fail(ErrorCode::bad_config, "key '" + key + "' is not an integer: " + *v);
  return out;
}

double KvReader::get_double(const std::string& key, double fallback) {
  const std::string* v = find(key);
  if (v == nullptr) return fallback;
  errno = 0;
  char* end = nullptr;
  double out = std::strtod(v->c_str(), &end);
  if (errno != 0 || end == v->c_str() || *end != '\0')
    fail(ErrorCode::bad_config, "key '" + key + "' is not a number: " + *v);
  return out;
}

uint64_t KvReader::get_u64(const std::string& key, uint64_t fallback) {
  const std::string* v = find(key);
  if (v == nullptr) return fallback;
  errno = 0;
  char* end = nullptr;
  unsigned long long out = std::strtoull(v->c_str(), &end, 10);
  if (errno != 0 || end == v->c_str() || *end != '\0' || v->front() == '-')
    fail(ErrorCode::bad_config, "key '" + key + "' is not an unsigned integer: " + *v);
  return out;
}

void KvReader::finish() const {
  for (size_t i = 0; i < pairs_.size(); ++i)
    if (!consumed_[i])
      fail(ErrorCode::bad_config, "unknown key '" + pairs_[i].first + "'");
}

}  // namespace mbc
