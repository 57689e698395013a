#include "gsamp/errors.hpp"

namespace gsamp {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_parameter: return "invalid_parameter";
    case ErrorCode::invalid_input: return "invalid_input";
    case ErrorCode::invalid_kernel: return "invalid_kernel";
    case ErrorCode::parse_error: return "parse_error";
    case ErrorCode::io_error: return "io_error";
  }
  return "unknown";
}

}  // namespace gsamp
