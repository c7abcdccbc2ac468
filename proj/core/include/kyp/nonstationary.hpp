#pragma once

#include "kyp/certify.hpp"

#include <vector>

namespace kyp {

// x(k+1) = A_k x(k) + B_k u(k), y(k) = C_k x(k) + D_k u(k), coefficients
// repeating with the period.
struct PeriodicSystem {
  std::vector<Mat> A, B, C, D;

  int period() const { return static_cast<int>(A.size()); }
  Eigen::Index n() const { return A.empty() ? 0 : A.front().rows(); }
  Eigen::Index m() const { return B.empty() ? 0 : B.front().cols(); }
  Eigen::Index p() const { return C.empty() ? 0 : C.front().rows(); }
  StateSpaceSystem step(int k) const;  // k taken modulo the period

  // Throws InvalidArgument for an empty or ragged sequence and the
  // StateSpaceSystem errors for inconsistent matrices.
  void validate() const;

  static PeriodicSystem constant(const StateSpaceSystem& sys, int period);
};

struct TvDichotomyReport {
  Mat monodromy;         // A_{p-1} ... A_0
  double margin = 0.0;   // min over eig(monodromy) of | |mu|^{1/p} - 1 |
  Eigen::Index dimMinus = 0;
  Eigen::Index dimPlus = 0;
  bool dichotomous = false;
};

TvDichotomyReport tv_dichotomy(const PeriodicSystem& ps, double tol = default_tol());

// Cyclic lift: state (xi_0, ..., xi_{p-1}), A = S blockdiag(A_k),
// B = S blockdiag(B_k), C = blockdiag(C_k), D = blockdiag(D_k), S the cyclic
// block shift xi_k -> xi_{k+1 mod p}. Slot k carries the periodic state at the
// times congruent to k, so iota_k embeds R^n into slot k and sigma_0 is the
// identity at lift time 0. Throws NoDichotomy.
struct LiftedSystem {
  StateSpaceSystem sys;
  int period = 1;
  Eigen::Index n = 0, m = 0, p = 0;

  // Index ranges of slot k in the lifted state/input/output.
  Eigen::Index state_offset(int k) const { return k * n; }
  Eigen::Index input_offset(int k) const { return k * m; }
  Eigen::Index output_offset(int k) const { return k * p; }
  // iota_k* H iota_k
  Mat extract(const Mat& H, int k) const { return H.block(state_offset(k), state_offset(k), n, n); }
};

LiftedSystem lift_stationary(const PeriodicSystem& ps, double tol = default_tol());

struct TvCertificate {
  std::vector<Mat> H;                 // indexed by k in [0, p)
  std::vector<RVec> residualSpectra;  // of tv_kyp_residuals, ascending
  Inertia inertia;
  double maxNorm = 0.0;      // max_k ||H_k||
  double maxInvNorm = 0.0;   // max_k ||H_k^{-1}||
  double epsilon = 0.0;      // strictness margin of the lifted certificate
  int windowN = 0;
  double minResidual = 0.0;  // min over k of min eig(R_k)
  CertificationReport lifted;  // report of the lifted certification
};

// R_k = blockdiag(H_k, I) - M_k* blockdiag(H_{k+1 mod p}, I) M_k - eps^2 I.
std::vector<Mat> tv_kyp_residuals(const PeriodicSystem& ps, const std::vector<Mat>& H, double eps = 0.0,
                                  double tol = default_tol());
std::vector<Mat> tv_kyp_residuals(const PeriodicSystem& ps, const TvCertificate& cert, double tol = default_tol());

// Strict certificate of the cyclic lift, cut down to its diagonal slots.
// Throws NoDichotomy or NotStrictlyContractive.
TvCertificate solve_tv_kyp(const PeriodicSystem& ps, const CertifyOptions& opt = {});

}  // namespace kyp
