#include "hallsim/error.hpp"

namespace hallsim {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::FactorizationSingular: return "FactorizationSingular";
    case ErrorCode::TooManyEigenvalues: return "TooManyEigenvalues";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::OutOfTable: return "OutOfTable";
    case ErrorCode::WindowNotInGap: return "WindowNotInGap";
    case ErrorCode::NoEdgeStatesInWindow: return "NoEdgeStatesInWindow";
    case ErrorCode::InvalidCutoff: return "InvalidCutoff";
    case ErrorCode::DegenerateWall: return "DegenerateWall";
    case ErrorCode::NoPositiveThreshold: return "NoPositiveThreshold";
    case ErrorCode::WrongGeometry: return "WrongGeometry";
    case ErrorCode::WindowAboveWall: return "WindowAboveWall";
    case ErrorCode::CoincidentPoints: return "CoincidentPoints";
    case ErrorCode::OnLandauLevel: return "OnLandauLevel";
    case ErrorCode::InsufficientDecayRange: return "InsufficientDecayRange";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what, long index)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), index_(index) {}

void fail(ErrorCode code, const std::string& what, long index) { throw Error(code, what, index); }

}  // namespace hallsim
