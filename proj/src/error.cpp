#include "kho/error.hpp"

namespace kho {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid argument";
    case ErrorCode::config: return "configuration error";
    case ErrorCode::io: return "I/O error";
    case ErrorCode::numerical: return "numerical failure";
    case ErrorCode::grid_mismatch: return "grid mismatch";
  }
  return "unknown error";
}

}  // namespace kho
