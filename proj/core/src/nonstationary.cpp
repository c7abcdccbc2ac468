#include "kyp/nonstationary.hpp"

#include "kyp/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>

namespace kyp {

StateSpaceSystem PeriodicSystem::step(int k) const {
  const int P = period();
  const auto i = static_cast<size_t>(((k % P) + P) % P);
  return StateSpaceSystem(A[i], B[i], C[i], D[i]);
}

void PeriodicSystem::validate() const {
  if (A.empty()) throw Error(ErrorCode::InvalidArgument, "period must be at least 1");
  if (B.size() != A.size() || C.size() != A.size() || D.size() != A.size())
    throw Error(ErrorCode::DimensionMismatch, "A, B, C, D sequences differ in length");
  for (int k = 0; k < period(); ++k) {
    StateSpaceSystem s = step(k);
    if (s.n() != n() || s.m() != m() || s.p() != p())
      throw Error(ErrorCode::DimensionMismatch, "step " + std::to_string(k) + " changes dimensions");
  }
}

PeriodicSystem PeriodicSystem::constant(const StateSpaceSystem& sys, int period) {
  if (period < 1) throw Error(ErrorCode::InvalidArgument, "period must be at least 1");
  PeriodicSystem ps;
  ps.A.assign(period, sys.A);
  ps.B.assign(period, sys.B);
  ps.C.assign(period, sys.C);
  ps.D.assign(period, sys.D);
  return ps;
}

TvDichotomyReport tv_dichotomy(const PeriodicSystem& ps, double tol) {
  ps.validate();
  TvDichotomyReport r;
  const Eigen::Index n = ps.n();
  r.monodromy = Mat::Identity(n, n);
  for (int k = 0; k < ps.period(); ++k) r.monodromy = ps.A[k] * r.monodromy;
  r.margin = std::numeric_limits<double>::infinity();
  if (n > 0) {
    Vec mu = Eigen::ComplexEigenSolver<Mat>(r.monodromy, false).eigenvalues();
    for (Eigen::Index i = 0; i < n; ++i) {
      const double rho = std::pow(std::abs(mu(i)), 1.0 / ps.period());
      r.margin = std::min(r.margin, std::abs(rho - 1.0));
      if (rho < 1.0) ++r.dimPlus;
      else ++r.dimMinus;
    }
  } else {
    r.margin = 1.0;
  }
  r.dichotomous = r.margin > tol;
  return r;
}

LiftedSystem lift_stationary(const PeriodicSystem& ps, double tol) {
  TvDichotomyReport d = tv_dichotomy(ps, tol);
  if (!d.dichotomous) throw Error(ErrorCode::NoDichotomy, "monodromy has spectrum on the unit circle");
  LiftedSystem L;
  L.period = ps.period();
  L.n = ps.n();
  L.m = ps.m();
  L.p = ps.p();
  const int P = L.period;
  Mat A = Mat::Zero(P * L.n, P * L.n), B = Mat::Zero(P * L.n, P * L.m);
  Mat C = Mat::Zero(P * L.p, P * L.n), D = Mat::Zero(P * L.p, P * L.m);
  for (int k = 0; k < P; ++k) {
    const int next = (k + 1) % P;
    A.block(L.state_offset(next), L.state_offset(k), L.n, L.n) = ps.A[k];
    B.block(L.state_offset(next), L.input_offset(k), L.n, L.m) = ps.B[k];
    C.block(L.output_offset(k), L.state_offset(k), L.p, L.n) = ps.C[k];
    D.block(L.output_offset(k), L.input_offset(k), L.p, L.m) = ps.D[k];
  }
  L.sys = StateSpaceSystem(A, B, C, D);
  return L;
}

std::vector<Mat> tv_kyp_residuals(const PeriodicSystem& ps, const std::vector<Mat>& H, double eps, double tol) {
  ps.validate();
  const int P = ps.period();
  if (static_cast<int>(H.size()) != P) throw Error(ErrorCode::DimensionMismatch, "one H_k per step is required");
  const Eigen::Index n = ps.n(), m = ps.m(), p = ps.p();
  for (const Mat& h : H) {
    if (h.rows() != n || h.cols() != n) throw Error(ErrorCode::DimensionMismatch, "H_k does not match the state");
    if (linalg::hermitian_defect(h) > tol * std::max(1.0, h.norm()))
      throw Error(ErrorCode::NotSelfadjoint, "H_k differs from its adjoint");
  }
  std::vector<Mat> R;
  R.reserve(P);
  for (int k = 0; k < P; ++k) {
    Mat M = ps.step(k).system_matrix();
    Mat Hk = linalg::hermitian_part(H[k]);
    Mat Hn = linalg::hermitian_part(H[(k + 1) % P]);
    Mat Rk = linalg::blockdiag(Hk, Mat::Identity(m, m)) - M.adjoint() * linalg::blockdiag(Hn, Mat::Identity(p, p)) * M;
    Rk.diagonal().array() -= eps * eps;
    R.push_back(linalg::hermitian_part(Rk));
  }
  return R;
}

std::vector<Mat> tv_kyp_residuals(const PeriodicSystem& ps, const TvCertificate& cert, double tol) {
  return tv_kyp_residuals(ps, cert.H, 0.0, tol);
}

TvCertificate solve_tv_kyp(const PeriodicSystem& ps, const CertifyOptions& opt) {
  LiftedSystem L = lift_stationary(ps, opt.tol);
  TvCertificate c;
  c.lifted = certify_strict(L.sys, opt);
  if (c.lifted.verdict != Verdict::StrictlyContractiveCertified || !c.lifted.certificate)
    throw Error(ErrorCode::NotStrictlyContractive,
                std::string("lifted system: ") + to_string(c.lifted.verdict) +
                    (c.lifted.diagnostics.message.empty() ? "" : " (" + c.lifted.diagnostics.message + ")"));
  const KypCertificate& lc = *c.lifted.certificate;
  Mat H = lc.original_coordinates();
  c.epsilon = lc.epsilon;
  c.windowN = lc.windowN;
  for (int k = 0; k < L.period; ++k) c.H.push_back(linalg::hermitian_part(L.extract(H, k)));

  std::vector<Mat> R = tv_kyp_residuals(ps, c.H, 0.0, opt.tol);
  c.minResidual = std::numeric_limits<double>::infinity();
  for (int k = 0; k < L.period; ++k) {
    c.residualSpectra.push_back(linalg::hermitian_eigenvalues(R[k]));
    if (c.residualSpectra.back().size()) c.minResidual = std::min(c.minResidual, c.residualSpectra.back()(0));
    const double nh = linalg::sigma_max(c.H[k]);
    const double smin = linalg::sigma_min(c.H[k]);
    c.maxNorm = std::max(c.maxNorm, nh);
    c.maxInvNorm = std::max(c.maxInvNorm, smin > 0 ? 1.0 / smin : std::numeric_limits<double>::infinity());
    Inertia in = inertia(c.H[k], inertia_threshold(c.H[k], opt.tol));
    if (k == 0) c.inertia = in;
    else if (!(in == c.inertia))
      throw Error(ErrorCode::NotStrictlyContractive, "extracted H_k do not share one inertia");
  }
  if (!(c.minResidual > 0.0))
    throw Error(ErrorCode::NotStrictlyContractive, "per-step residual is not positive definite");
  return c;
}

}  // namespace kyp
