#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rewardlab {

enum class ErrorCode {
  MalformedFraming,
  EmptyTruths,
  NonpositiveScale,
  ToolLogMismatch,
  DuplicateDocId,
  UnknownDocId,
  EmptyBody,
  MalformedCall,
  ParseError,
  DuplicateId,
  InvalidConfig,
  PolicyError,
};

std::string_view to_string(ErrorCode code);

// All library failures surface as this exception; violations found while
// parsing agent output are data and never thrown.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace rewardlab
