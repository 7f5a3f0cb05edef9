#ifndef KHO_ERROR_HPP
#define KHO_ERROR_HPP

#include <stdexcept>
#include <string>

namespace kho {

enum class ErrorCode {
  invalid_argument,
  config,
  io,
  numerical,
  grid_mismatch,
};

const char* to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries one of the codes above; the C
// API maps them onto kho_status values.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace kho

#endif  // KHO_ERROR_HPP
