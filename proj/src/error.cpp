#include "mbc/error.hpp"

namespace mbc {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_band_count: return "invalid-band-count";
    case ErrorCode::insufficient_taps: return "insufficient-taps";
    case ErrorCode::band_mismatch: return "band-mismatch";
    case ErrorCode::empty_input: return "empty-input";
    case ErrorCode::too_short: return "too-short";
    case ErrorCode::undefined_reference: return "undefined-reference";
    case ErrorCode::dim_mismatch: return "dim-mismatch";
    case ErrorCode::bad_depth: return "bad-depth";
    case ErrorCode::bad_code: return "bad-code";
    case ErrorCode::empty_corpus: return "empty-corpus";
    case ErrorCode::degenerate_vector: return "degenerate-vector";
    case ErrorCode::bad_distribution: return "bad-distribution";
    case ErrorCode::code_out_of_range: return "code-out-of-range";
    case ErrorCode::depth_mismatch: return "depth-mismatch";
    case ErrorCode::not_a_stream: return "not-a-stream";
    case ErrorCode::corrupt_stream: return "corrupt-stream";
    case ErrorCode::unsupported_format: return "unsupported-format";
    case ErrorCode::io_error: return "io-error";
    case ErrorCode::rate_mismatch: return "rate-mismatch";
    case ErrorCode::model_not_ready: return "model-not-ready";
    case ErrorCode::config_mismatch: return "config-mismatch";
    case ErrorCode::insufficient_data: return "insufficient-data";
    case ErrorCode::bad_config: return "bad-config";
  }
  return "unknown-error";
}

}  // namespace mbc
