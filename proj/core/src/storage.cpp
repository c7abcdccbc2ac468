#include "kyp/storage.hpp"

#include "kyp/linalg.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <cmath>
#include <limits>

namespace kyp {

namespace {

double sigma_min_or_inf(const Mat& W) {
  if (W.rows() == 0 || W.cols() == 0) return std::numeric_limits<double>::infinity();
  return linalg::sigma_min(W);
}

void check_selfadjoint(const Mat& H, Eigen::Index n, double tol) {
  if (H.rows() != H.cols()) throw Error(ErrorCode::NonSquare, "H must be square");
  if (H.rows() != n) throw Error(ErrorCode::DimensionMismatch, "H does not match the state dimension");
  if (linalg::hermitian_defect(H) > tol * std::max(1.0, H.norm()))
    throw Error(ErrorCode::NotSelfadjoint, "H differs from its adjoint");
}

// Block j of T* W, T = toeplitz_block(F, N), W with N block rows of height p.
Mat toeplitz_adjoint_apply(const LaurentSlice& F, int N, const Mat& W) {
  const Eigen::Index p = F.coeffs.front().rows(), m = F.coeffs.front().cols();
  Mat out = Mat::Zero(N * m, W.cols());
  if (W.cols() == 0) return out;
  for (int j = 0; j < N; ++j)
    for (int i = 0; i < N; ++i) out.middleRows(j * m, m).noalias() += F.at(i - j).adjoint() * W.middleRows(i * p, p);
  return out;
}

Mat right_inverse(const Mat& W) {
  if (W.rows() == 0) return Mat::Zero(W.cols(), 0);
  Eigen::LLT<Mat> llt(W * W.adjoint());
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::NotExactlyMinimal, "controllability operator not surjective");
  return W.adjoint() * llt.solve(Mat::Identity(W.rows(), W.rows()));
}

Mat assemble(const Mat& Hmm, const Mat& Hpm, const Mat& Hpp) {
  const Eigen::Index r = Hmm.rows(), s = Hpp.rows();
  Mat H(r + s, r + s);
  H.topLeftCorner(r, r) = Hmm;
  H.bottomRightCorner(s, s) = Hpp;
  H.bottomLeftCorner(s, r) = Hpm;
  H.topRightCorner(r, s) = Hpm.adjoint();
  return linalg::hermitian_part(H);
}

// Projection onto (Dt * ker W)^perp.
Mat kernel_projection(const Mat& Dt, const Mat& W) {
  const Eigen::Index K = Dt.rows();
  Mat Kb = W.rows() == 0 ? Mat(Mat::Identity(K, K)) : linalg::null_basis(W);
  Mat Q = linalg::orth(Dt * Kb);
  return Mat::Identity(K, K) - Q * Q.adjoint();
}

struct DefectPair {
  Mat T, DT, DTs;
};

DefectPair defects(const LaurentSlice& F, int N, double tol) {
  DefectPair d;
  d.T = toeplitz_block(F, N);
  d.DT = defect(d.T, tol);
  d.DTs = defect(d.T.adjoint(), tol);
  return d;
}

Eigen::LLT<Mat> factor_defect_square(const LaurentSlice& F, int N) {
  Mat G = toeplitz_defect_square(F, N);
  Eigen::LLT<Mat> llt(G);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::NotContractive, "I - T*T is not positive definite");
  const double floor = 1e-14 * std::max(1.0, G.diagonal().real().maxCoeff());
  const auto diagL = llt.matrixLLT().diagonal().real();
  if (diagL.size() && diagL.cwiseAbs2().minCoeff() < floor)
    throw Error(ErrorCode::NotContractive, "I - T*T is numerically singular");
  return llt;
}

Mat hermitian_inverse(const Mat& S, const char* what) {
  Eigen::LLT<Mat> llt(linalg::hermitian_part(S));
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::NotExactlyMinimal, what);
  return llt.solve(Mat::Identity(S.rows(), S.rows()));
}

Mat available_explicit(const GramianData& g, const LaurentSlice& F, double tol) {
  const int N = g.window.N;
  DefectPair d = defects(F, N, tol);
  Mat X = douglas_factor(d.DTs, g.WoPlus, tol).X;
  Mat Wd = right_inverse(g.WcMinus);
  Mat Pa = kernel_projection(d.DT, g.WcMinus);
  const Eigen::Index K = d.T.rows();
  Mat TPa = d.T * Pa;
  Mat Hpp = X.adjoint() * (Mat::Identity(K, K) - TPa * d.T.adjoint()) * X;
  Mat DWd = d.DT * Wd;
  Mat Hpm = X.adjoint() * TPa * DWd;
  Mat Hmm = -DWd.adjoint() * Pa * DWd;
  return assemble(Hmm, Hpm, Hpp);
}

Mat required_explicit(const GramianData& g, const LaurentSlice& F, double tol) {
  const int N = g.window.N;
  DefectPair d = defects(F, N, tol);
  Mat X = douglas_factor(d.DTs, g.WoMinus, tol).X;
  Mat Wd = right_inverse(g.WcPlus);
  Mat Pr = kernel_projection(d.DT, g.WcPlus);
  const Eigen::Index K = d.T.rows();
  Mat DWd = d.DT * Wd;
  Mat Hpp = DWd.adjoint() * Pr * DWd;
  Mat Hpm = -DWd.adjoint() * Pr * d.T.adjoint() * X;
  Mat Hmm = -X.adjoint() * (Mat::Identity(K, K) - d.T * Pr * d.T.adjoint()) * X;
  return assemble(Hmm, Hpm, Hpp);
}

// max over inputs v with W v = r of |a + T v|^2 - |v|^2, a = Wo x_o, written as
// a quadratic form in (r, x_o):  c + b* G^{-1} b - (r - W G^{-1} b)* S^{-1} (r - W G^{-1} b)
// with G = I - T*T, b = T* a, S = W G^{-1} W*.
struct ConstrainedForm {
  Mat rr, orr, oo;  // coefficients of r* . r, x_o* . r, x_o* . x_o
};

ConstrainedForm constrained_max(const Eigen::LLT<Mat>& llt, const LaurentSlice& F, int N, const Mat& W,
                                const Mat& Wo) {
  const Eigen::Index r = W.rows(), o = Wo.cols();
  Mat Bm = toeplitz_adjoint_apply(F, N, Wo);
  Mat rhs(W.cols(), r + o);
  rhs << W.adjoint(), Bm;
  Mat Y = llt.solve(rhs);
  ConstrainedForm f;
  f.oo = Wo.adjoint() * Wo + Bm.adjoint() * Y.rightCols(o);
  if (r == 0) {
    f.rr = Mat(0, 0);
    f.orr = Mat(o, 0);
    return f;
  }
  Mat S = W * Y.leftCols(r);
  Mat E = W * Y.rightCols(o);
  Mat Sinv = hermitian_inverse(S, "controllability operator not surjective on the window");
  Mat SinvE = Sinv * E;
  f.rr = -Sinv;
  f.orr = SinvE.adjoint();
  f.oo -= E.adjoint() * SinvE;
  return f;
}

Mat available_constrained(const GramianData& g, const LaurentSlice& F) {
  const int N = g.window.N;
  Eigen::LLT<Mat> llt = factor_defect_square(F, N);
  ConstrainedForm f = constrained_max(llt, F, N, g.WcMinus, g.WoPlus);
  // r = x_minus, x_o = x_plus
  return assemble(f.rr, f.orr, f.oo);
}

Mat required_constrained(const GramianData& g, const LaurentSlice& F) {
  const int N = g.window.N;
  Eigen::LLT<Mat> llt = factor_defect_square(F, N);
  ConstrainedForm f = constrained_max(llt, F, N, g.WcPlus, g.WoMinus);
  // r = x_plus, x_o = x_minus; required storage is the negated maximum.
  return assemble(-f.oo, -f.orr.adjoint(), -f.rr);
}

using Route = Mat (*)(const GramianData&, const LaurentSlice&);
using ExplicitRoute = Mat (*)(const GramianData&, const LaurentSlice&, double);

Mat run_storage(const GramianData& g, const LaurentSlice& F, StorageMethod method, double tol, std::string* used,
                Route constrained, ExplicitRoute explicit_route) {
  if (method == StorageMethod::Explicit) {
    if (used) *used = "explicit";
    return explicit_route(g, F, tol);
  }
  try {
    Mat H = constrained(g, F);
    if (used) *used = "constrained";
    return H;
  } catch (const Error& e) {
    if (method == StorageMethod::Constrained || e.code() != ErrorCode::NotContractive) throw;
  }
  if (used) *used = "explicit";
  return explicit_route(g, F, tol);
}

KypCertificate finish(const Mat& H, Eigen::Index dm, const GramianData& g, const Mat& residual, double tol) {
  KypCertificate c;
  c.H = H;
  const Eigen::Index dp = H.rows() - dm;
  c.Hminus = H.topLeftCorner(dm, dm);
  c.H0 = H.topRightCorner(dm, dp);
  c.Hplus = H.bottomRightCorner(dp, dp);
  c.residualSpectrum = linalg::hermitian_eigenvalues(residual);
  c.inertia = inertia(H, inertia_threshold(H, tol));
  c.windowN = g.window.N;
  c.tailBound = g.window.tailBound;
  return c;
}

struct WindowData {
  GramianData g;
  LaurentSlice F;
};

WindowData window_data(const BicausalRealization& bi, const StorageOptions& opt) {
  WindowData w;
  const int N = opt.N > 0 ? opt.N : make_window(bi, 0).N;
  w.g = build_gramians(bi, N);
  if (opt.requireMinimality && !check_exact_minimality(w.g, opt.tol).exact())
    throw Error(ErrorCode::NotExactlyMinimal, "window controllability/observability operators are not surjective");
  w.F.window = w.g.window;
  w.F.kmin = -N;
  w.F.coeffs = laurent_coeffs(bi, -N, N);
  w.F.tailBound = w.g.window.tailBound;
  return w;
}

KypCertificate certificate_for(const BicausalRealization& bi, const DichotomousDecomposition* dec,
                               const StorageOptions& opt, bool available) {
  WindowData w = window_data(bi, opt);
  std::string used;
  Mat H = available ? available_storage(w.g, w.F, opt.method, opt.tol, &used)
                    : required_storage(w.g, w.F, opt.method, opt.tol, &used);
  Mat R = dec ? kyp_residual(split_system(*dec), H, 0.0, opt.tol) : bicausal_kyp_residual(bi, H, 0.0, opt.tol);
  KypCertificate c = finish(H, bi.dimMinus(), w.g, R, opt.tol);
  c.T = dec ? dec->T : Mat(Mat::Identity(bi.n(), bi.n()));
  c.bicausal = dec == nullptr;
  c.storage = available ? "Ha" : "Hr";
  c.method = used;
  return c;
}

}  // namespace

GramianData build_gramians(const BicausalRealization& bi, int N) {
  if (N < 1) throw Error(ErrorCode::InvalidArgument, "window half-width must be at least 1");
  const Eigen::Index dp = bi.dimPlus(), dm = bi.dimMinus(), m = bi.m(), p = bi.p();
  GramianData g;
  g.window = make_window(bi, N);
  g.WcPlus.resize(dp, N * m);
  g.WoPlus.resize(N * p, dp);
  g.WcMinus.resize(dm, N * m);
  g.WoMinus.resize(N * p, dm);

  Mat P = bi.Bplus;                        // A+^k B+
  Mat O = bi.Cplus;                        // C+ A+^k
  Mat Q = bi.Bminus;                       // A~-^k B~-
  Mat Om = bi.Cminus * bi.Aminus;          // C~- A~-^{k+1}
  for (int k = 0; k < N; ++k) {
    g.WcPlus.middleCols((N - 1 - k) * m, m) = P;
    g.WoPlus.middleRows(k * p, p) = O;
    g.WcMinus.middleCols(k * m, m) = Q;
    g.WoMinus.middleRows((N - 1 - k) * p, p) = Om;
    if (k + 1 < N) {
      P = bi.Aplus * P;
      O = O * bi.Aplus;
      Q = bi.Aminus * Q;
      Om = Om * bi.Aminus;
    }
  }
  g.sigmaMin.cPlus = sigma_min_or_inf(g.WcPlus);
  g.sigmaMin.cMinus = sigma_min_or_inf(g.WcMinus);
  g.sigmaMin.oPlus = sigma_min_or_inf(g.WoPlus);
  g.sigmaMin.oMinus = sigma_min_or_inf(g.WoMinus);
  return g;
}

GramianData build_gramians(const DichotomousDecomposition& dec, int N) { return build_gramians(to_bicausal(dec), N); }

MinimalityReport check_exact_minimality(const GramianData& g, double tol) {
  MinimalityReport r;
  r.margins = g.sigmaMin;
  r.controllablePlus = g.sigmaMin.cPlus > tol;
  r.controllableMinus = g.sigmaMin.cMinus > tol;
  r.observablePlus = g.sigmaMin.oPlus > tol;
  r.observableMinus = g.sigmaMin.oMinus > tol;
  return r;
}

Mat defect(const Mat& T, double tol) {
  const Eigen::Index K = T.cols();
  Mat S = Mat::Identity(K, K) - T.adjoint() * T;
  const double scale = std::max(1.0, S.norm());
  const double clip = std::max(10.0 * std::numeric_limits<double>::epsilon() * scale, 2.0 * tol + tol * tol);
  return linalg::psd_sqrt(S, clip);
}

DouglasFactor douglas_factor(const Mat& Dop, const Mat& W, double tol) {
  if (Dop.rows() != Dop.cols() || Dop.rows() != W.rows())
    throw Error(ErrorCode::DimensionMismatch, "Douglas factor needs square D with W rows matching");
  DouglasFactor f;
  Mat Dp = linalg::pinv_psd(Dop, 1e-10);
  f.X = Dp * W;
  f.residual = (W - Dop * f.X).norm();
  f.rangeDefect = (f.X - Dop * (Dp * f.X)).norm();
  if (f.residual > tol * W.norm())
    throw Error(ErrorCode::RangeViolation, "W is not in the range of D (residual " + std::to_string(f.residual) + ")");
  return f;
}

double inertia_threshold(const Mat& H, double tol) {
  return std::max(tol, 100 * std::numeric_limits<double>::epsilon() * H.norm());
}

Inertia inertia(const Mat& H, double tol) {
  Inertia in;
  RVec ev = linalg::hermitian_eigenvalues(H);
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) > tol) ++in.nPlus;
    else if (ev(i) < -tol) ++in.nMinus;
    else ++in.nZero;
  }
  return in;
}

double KypCertificate::min_residual() const {
  return residualSpectrum.size() ? residualSpectrum(0) : std::numeric_limits<double>::infinity();
}

Mat KypCertificate::original_coordinates() const {
  if (T.size() == 0) return H;
  Mat Ti = T.partialPivLu().inverse();
  return linalg::hermitian_part(Ti.adjoint() * H * Ti);
}

Mat toeplitz_defect_square(const LaurentSlice& F, int N) {
  const Eigen::Index m = F.coeffs.front().cols();
  Mat G(N * m, N * m);
  for (int j = 0; j < N; ++j) {
    Mat acc = Mat::Zero(m, m);
    for (int i = 0; i < N; ++i) acc.noalias() += F.at(i - j).adjoint() * F.at(i);
    G.block(j * m, 0, m, m) = acc;
  }
  for (int l = 1; l < N; ++l)
    for (int j = l; j < N; ++j)
      G.block(j * m, l * m, m, m) = G.block((j - 1) * m, (l - 1) * m, m, m) + F.at(-j).adjoint() * F.at(-l) -
                                    F.at(N - j).adjoint() * F.at(N - l);
  for (int l = 1; l < N; ++l)
    for (int j = 0; j < l; ++j) G.block(j * m, l * m, m, m) = G.block(l * m, j * m, m, m).adjoint();
  return Mat::Identity(N * m, N * m) - G;
}

Mat available_storage(const GramianData& g, const LaurentSlice& F, StorageMethod method, double tol,
                      std::string* usedMethod) {
  return run_storage(g, F, method, tol, usedMethod, &available_constrained, &available_explicit);
}

Mat required_storage(const GramianData& g, const LaurentSlice& F, StorageMethod method, double tol,
                     std::string* usedMethod) {
  return run_storage(g, F, method, tol, usedMethod, &required_constrained, &required_explicit);
}

KypCertificate compute_Ha(const DichotomousDecomposition& dec, const StorageOptions& opt) {
  return certificate_for(to_bicausal(dec), &dec, opt, true);
}

KypCertificate compute_Ha(const BicausalRealization& bi, const StorageOptions& opt) {
  return certificate_for(bi, nullptr, opt, true);
}

KypCertificate compute_Hr(const DichotomousDecomposition& dec, const StorageOptions& opt) {
  return certificate_for(to_bicausal(dec), &dec, opt, false);
}

KypCertificate compute_Hr(const BicausalRealization& bi, const StorageOptions& opt) {
  return certificate_for(bi, nullptr, opt, false);
}

Mat kyp_residual(const StateSpaceSystem& sys, const Mat& H, double eps, double tol) {
  sys.validate();
  const Eigen::Index n = sys.n(), m = sys.m(), p = sys.p();
  check_selfadjoint(H, n, tol);
  Mat M = sys.system_matrix();
  Mat Hs = linalg::hermitian_part(H);
  Mat R = linalg::blockdiag(Hs, Mat::Identity(m, m)) - M.adjoint() * linalg::blockdiag(Hs, Mat::Identity(p, p)) * M;
  R.diagonal().array() -= eps * eps;
  return linalg::hermitian_part(R);
}

Mat bicausal_congruence(const BicausalRealization& bi) {
  const Eigen::Index dm = bi.dimMinus(), dp = bi.dimPlus(), m = bi.m();
  Mat Rm = Mat::Identity(dm + dp + m, dm + dp + m);
  Rm.topLeftCorner(dm, dm) = bi.Aminus;
  Rm.topRightCorner(dm, m) = bi.Bminus;
  return Rm;
}

Mat bicausal_kyp_residual(const BicausalRealization& bi, const Mat& H, double eps, double tol) {
  const Eigen::Index dm = bi.dimMinus(), dp = bi.dimPlus(), m = bi.m(), p = bi.p();
  const Eigen::Index n = dm + dp;
  check_selfadjoint(H, n, tol);
  Mat Hs = linalg::hermitian_part(H);
  Mat Rm = bicausal_congruence(bi);
  Mat L = Mat::Zero(n + p, n + m);
  L.topLeftCorner(dm, dm).setIdentity();
  L.block(dm, dm, dp, dp) = bi.Aplus;
  L.block(dm, n, dp, m) = bi.Bplus;
  L.block(n, 0, p, dm) = bi.Cminus * bi.Aminus;
  L.block(n, dm, p, dp) = bi.Cplus;
  L.block(n, n, p, m) = bi.Dhat;
  Mat R = Rm.adjoint() * linalg::blockdiag(Hs, Mat::Identity(m, m)) * Rm -
          L.adjoint() * linalg::blockdiag(Hs, Mat::Identity(p, p)) * L - eps * eps * (Rm.adjoint() * Rm);
  return linalg::hermitian_part(R);
}

}  // namespace kyp
