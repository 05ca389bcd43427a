#pragma once

#include <stdexcept>
#include <string>

namespace transient {

enum class ErrorCode {
  invalid_argument,
  invalid_state,
  degenerate_system,
  missing_data,
  wrong_kind,
  seed_too_large,
  empty_safe_zone,
  no_reference,
  undefined_index,
  parse_error,
  ordering_error,
  format_error,
  io_error,
};

/// Single exception type for the library; the code tells callers (and the CLI
/// exit-code mapping) which failure class occurred.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace transient
