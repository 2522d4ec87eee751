#pragma once

#include <stdexcept>
#include <string>

namespace proxstair {

enum class ErrorCode {
  EmptyData,
  NegativeWeight,
  NonpositiveGamma,
  NonFinite,
  ShapeMismatch,
  IndexOutOfRange,
  InvalidArgument,
  BadBounds,
  NoConvergence,
  LineSearchStall,
  LinearSolveFail,
  DegenerateElement,
  TooCoarse,
  Format,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& msg)
      : std::runtime_error(msg), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace proxstair
