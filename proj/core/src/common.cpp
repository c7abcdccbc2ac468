#include "kyp/common.hpp"

#include <cmath>
#include <cstdlib>

namespace kyp {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonSquare: return "NonSquare";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::NoDichotomy: return "NoDichotomy";
    case ErrorCode::SylvesterFailure: return "SylvesterFailure";
    case ErrorCode::SingularAminus: return "SingularAminus";
    case ErrorCode::NonPositiveEpsilon: return "NonPositiveEpsilon";
    case ErrorCode::PoleProximity: return "PoleProximity";
    case ErrorCode::WindowTooSmall: return "WindowTooSmall";
    case ErrorCode::StateMismatch: return "StateMismatch";
    case ErrorCode::NotExactlyControllable: return "NotExactlyControllable";
    case ErrorCode::NotSelfadjoint: return "NotSelfadjoint";
    case ErrorCode::NotContractive: return "NotContractive";
    case ErrorCode::RangeViolation: return "RangeViolation";
    case ErrorCode::NotExactlyMinimal: return "NotExactlyMinimal";
    case ErrorCode::NotStrictlyContractive: return "NotStrictlyContractive";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

double default_tol() {
  if (const char* env = std::getenv("KYP_DEFAULT_TOL")) {
    char* end = nullptr;
    double v = std::strtod(env, &end);
    if (end != env && std::isfinite(v) && v > 0) return v;
  }
  return 1e-8;
}

}  // namespace kyp
