#pragma once

#include <stdexcept>
#include <string>

namespace hallsim {

enum class ErrorCode {
  InvalidArgument,
  NonConvergence,
  FactorizationSingular,
  TooManyEigenvalues,
  GridMismatch,
  OutOfTable,
  WindowNotInGap,
  NoEdgeStatesInWindow,
  InvalidCutoff,
  DegenerateWall,
  NoPositiveThreshold,
  WrongGeometry,
  WindowAboveWall,
  CoincidentPoints,
  OnLandauLevel,
  InsufficientDecayRange,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what, long index = -1);

  ErrorCode code() const noexcept { return code_; }
  // Offending eigenvalue index for NonConvergence, -1 otherwise.
  long index() const noexcept { return index_; }

 private:
  ErrorCode code_;
  long index_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what, long index = -1);

}  // namespace hallsim
