#pragma once

#include <stdexcept>
#include <string>

namespace mavdet {

enum class ErrorCode {
  invalid_dimensions,
  dimension_mismatch,
  insufficient_matches,
  degenerate_configuration,
  empty_input,
  numeric_degeneracy,
  no_groundtruth,
  invalid_config,
  backend_unavailable,
  io_error,
  parse_error,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mavdet
