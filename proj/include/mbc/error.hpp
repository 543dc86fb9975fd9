// Error codes shared by every module.  Each failure mode documented on the
// public interfaces maps to exactly one code; the CLI translates codes to
// exit statuses.
#pragma once

#include <stdexcept>
#include <string>

namespace mbc {

enum class ErrorCode {
  // filter bank
  invalid_band_count,
  insufficient_taps,
  band_mismatch,
  // signals
  empty_input,
  too_short,
  undefined_reference,
  // quantizers
  dim_mismatch,
  bad_depth,
  bad_code,
  empty_corpus,
  degenerate_vector,
  // depth sampling
  bad_distribution,
  // streams and files
  code_out_of_range,
  depth_mismatch,
  not_a_stream,
  corrupt_stream,
  unsupported_format,
  io_error,
  // pipeline
  rate_mismatch,
  model_not_ready,
  config_mismatch,
  insufficient_data,
  bad_config,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace mbc
