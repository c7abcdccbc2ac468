#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace kyp {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

enum class ErrorCode {
  NonSquare,
  DimensionMismatch,
  NonFinite,
  NoDichotomy,
  SylvesterFailure,
  SingularAminus,
  NonPositiveEpsilon,
  PoleProximity,
  WindowTooSmall,
  StateMismatch,
  NotExactlyControllable,
  NotSelfadjoint,
  NotContractive,
  RangeViolation,
  NotExactlyMinimal,
  NotStrictlyContractive,
  InvalidArgument,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail);
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// 1e-8 unless KYP_DEFAULT_TOL holds a positive real.
double default_tol();

}  // namespace kyp
