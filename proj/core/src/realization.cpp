#include "kyp/realization.hpp"

#include "kyp/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>

#include <cmath>
#include <limits>

namespace kyp {

namespace {

void require(bool ok, ErrorCode code, const std::string& what) {
  if (!ok) throw Error(code, what);
}

void require_shape(const Mat& M, Eigen::Index r, Eigen::Index c, const char* name) {
  if (M.rows() != r || M.cols() != c)
    throw Error(ErrorCode::DimensionMismatch, std::string(name) + " is " + std::to_string(M.rows()) + "x" +
                                                  std::to_string(M.cols()) + ", expected " + std::to_string(r) +
                                                  "x" + std::to_string(c));
}

}  // namespace

StateSpaceSystem::StateSpaceSystem(Mat A_, Mat B_, Mat C_, Mat D_)
    : A(std::move(A_)), B(std::move(B_)), C(std::move(C_)), D(std::move(D_)) {
  validate();
}

void StateSpaceSystem::validate() const {
  require(A.rows() == A.cols(), ErrorCode::NonSquare, "A must be square");
  const Eigen::Index n_ = A.rows();
  require(B.rows() == n_, ErrorCode::DimensionMismatch, "B must have n rows");
  require(C.cols() == n_, ErrorCode::DimensionMismatch, "C must have n columns");
  require(D.rows() == C.rows() && D.cols() == B.cols(), ErrorCode::DimensionMismatch, "D must be p x m");
  require(A.allFinite() && B.allFinite() && C.allFinite() && D.allFinite(), ErrorCode::NonFinite,
          "system matrices contain NaN or Inf");
}

Mat StateSpaceSystem::system_matrix() const {
  Mat M(n() + p(), n() + m());
  M << A, B, C, D;
  return M;
}

BicausalRealization make_bicausal(Mat Aplus, Mat Bplus, Mat Cplus, Mat Dtilde, Mat Aminus, Mat Bminus,
                                  Mat Cminus) {
  BicausalRealization bi;
  const Eigen::Index dp = Aplus.rows(), dm = Aminus.rows();
  const Eigen::Index m = Dtilde.cols(), p = Dtilde.rows();
  require(Aplus.cols() == dp, ErrorCode::NonSquare, "Aplus must be square");
  require(Aminus.cols() == dm, ErrorCode::NonSquare, "Aminus must be square");
  require_shape(Bplus, dp, m, "Bplus");
  require_shape(Cplus, p, dp, "Cplus");
  require_shape(Bminus, dm, m, "Bminus");
  require_shape(Cminus, p, dm, "Cminus");
  for (const Mat* M : {&Aplus, &Bplus, &Cplus, &Dtilde, &Aminus, &Bminus, &Cminus})
    require(M->allFinite(), ErrorCode::NonFinite, "bicausal matrices contain NaN or Inf");
  require(linalg::spectral_radius(Aplus) < 1.0, ErrorCode::NoDichotomy, "Aplus is not exponentially stable");
  require(linalg::spectral_radius(Aminus) < 1.0, ErrorCode::NoDichotomy, "Aminus is not exponentially stable");
  bi.Aplus = std::move(Aplus);
  bi.Bplus = std::move(Bplus);
  bi.Cplus = std::move(Cplus);
  bi.Dtilde = std::move(Dtilde);
  bi.Aminus = std::move(Aminus);
  bi.Bminus = std::move(Bminus);
  bi.Cminus = std::move(Cminus);
  bi.Dhat = bi.Cminus * bi.Bminus + bi.Dtilde;
  return bi;
}

double spectral_margin(const Mat& A) {
  require(A.rows() == A.cols(), ErrorCode::NonSquare, "spectral_margin needs a square matrix");
  if (A.rows() == 0) return std::numeric_limits<double>::infinity();
  Eigen::ComplexEigenSolver<Mat> es(A, false);
  return (es.eigenvalues().cwiseAbs().array() - 1.0).abs().minCoeff();
}

DichotomousDecomposition dichotomy_split(const StateSpaceSystem& sys, double tol) {
  sys.validate();
  const Eigen::Index n = sys.n();
  DichotomousDecomposition dec;
  dec.D = sys.D;
  dec.margin = spectral_margin(sys.A);
  if (n > 0 && !(dec.margin > tol))
    throw Error(ErrorCode::NoDichotomy, "eigenvalue within " + std::to_string(dec.margin) + " of the unit circle");

  linalg::OrderedSchur sch = linalg::ordered_schur(sys.A, [](cplx z) { return std::abs(z) < 1.0; });
  const Eigen::Index s = sch.selected;
  const Eigen::Index r = n - s;

  Mat X = linalg::solve_triangular_sylvester(sch.R.topLeftCorner(s, s), sch.R.bottomRightCorner(r, r),
                                             -sch.R.topRightCorner(s, r));
  if (!X.allFinite() || X.norm() * tol > 1.0)
    throw Error(ErrorCode::SylvesterFailure, "decoupling solve norm " + std::to_string(X.norm()));

  Mat Vplus = sch.Q.leftCols(s);
  Mat Vminus(n, r);
  if (r > 0) {
    Mat W = sch.Q.leftCols(s) * X + sch.Q.rightCols(r);
    Eigen::HouseholderQR<Mat> qr(W);
    Vminus = qr.householderQ() * Mat::Identity(n, r);
  }
  dec.T.resize(n, n);
  dec.T << Vminus, Vplus;
  dec.Tinv = dec.T.partialPivLu().inverse();
  if (!dec.Tinv.allFinite()) throw Error(ErrorCode::SylvesterFailure, "split similarity is singular");

  Mat As = dec.Tinv * sys.A * dec.T;
  const double offdiag = As.topRightCorner(r, s).norm() + As.bottomLeftCorner(s, r).norm();
  if (offdiag > 10.0 * tol * std::max(1.0, sys.A.norm()))
    throw Error(ErrorCode::SylvesterFailure, "split leaves coupling " + std::to_string(offdiag));

  Mat Bs = dec.Tinv * sys.B;
  Mat Cs = sys.C * dec.T;
  dec.dimMinus = r;
  dec.dimPlus = s;
  dec.Aminus = As.topLeftCorner(r, r);
  dec.Aplus = As.bottomRightCorner(s, s);
  dec.Bminus = Bs.topRows(r);
  dec.Bplus = Bs.bottomRows(s);
  dec.Cminus = Cs.leftCols(r);
  dec.Cplus = Cs.rightCols(s);
  return dec;
}

StateSpaceSystem split_system(const DichotomousDecomposition& dec) {
  Mat A = linalg::blockdiag(dec.Aminus, dec.Aplus);
  Mat B(dec.n(), dec.m());
  B << dec.Bminus, dec.Bplus;
  Mat C(dec.p(), dec.n());
  C << dec.Cminus, dec.Cplus;
  return StateSpaceSystem(A, B, C, dec.D);
}

BicausalRealization to_bicausal(const DichotomousDecomposition& dec, const Mat& D) {
  const Eigen::Index r = dec.dimMinus;
  Mat Atm(r, r), Btm(r, D.cols());
  if (r > 0) {
    Eigen::PartialPivLU<Mat> lu(dec.Aminus);
    Atm = lu.inverse();
    Btm = -lu.solve(dec.Bminus);
  }
  return make_bicausal(dec.Aplus, dec.Bplus, dec.Cplus, D, Atm, Btm, dec.Cminus);
}

BicausalRealization to_bicausal(const DichotomousDecomposition& dec) { return to_bicausal(dec, dec.D); }

StateSpaceSystem from_bicausal(const BicausalRealization& bi, double tol) {
  const Eigen::Index dp = bi.dimPlus(), dm = bi.dimMinus();
  Mat Ainv(dm, dm), Bm(dm, bi.m());
  if (dm > 0) {
    RVec s = linalg::singular_values(bi.Aminus);
    if (!(s(0) > 0) || s(s.size() - 1) < tol * s(0))
      throw Error(ErrorCode::SingularAminus, "anticausal state operator is not invertible at tolerance");
    Eigen::PartialPivLU<Mat> lu(bi.Aminus);
    Ainv = lu.inverse();
    Bm = -lu.solve(bi.Bminus);
  }
  Mat A = linalg::blockdiag(bi.Aplus, Ainv);
  Mat B(dp + dm, bi.m());
  B << bi.Bplus, Bm;
  Mat C(bi.p(), dp + dm);
  C << bi.Cplus, bi.Cminus;
  return StateSpaceSystem(A, B, C, bi.Dtilde);
}

AugmentedSystem augment_epsilon(const StateSpaceSystem& sys, double eps) {
  if (!(eps > 0) || !std::isfinite(eps)) throw Error(ErrorCode::NonPositiveEpsilon, "epsilon must be positive");
  sys.validate();
  const Eigen::Index n = sys.n(), m = sys.m(), p = sys.p();
  AugmentedSystem aug;
  aug.base = sys;
  aug.epsilon = eps;
  Mat B(n, m + n);
  B << sys.B, eps * Mat::Identity(n, n);
  Mat C = Mat::Zero(p + n + m, n);
  C.topRows(p) = sys.C;
  C.middleRows(p, n) = eps * Mat::Identity(n, n);
  Mat D = Mat::Zero(p + n + m, m + n);
  D.topLeftCorner(p, m) = sys.D;
  D.bottomLeftCorner(m, m) = eps * Mat::Identity(m, m);
  aug.augmented = StateSpaceSystem(sys.A, B, C, D);
  for (Eigen::Index i = 0; i < m; ++i) aug.baseInputs.push_back(i);
  for (Eigen::Index i = 0; i < p; ++i) aug.baseOutputs.push_back(i);
  return aug;
}

AugmentedBicausal augment_epsilon_bicausal(const BicausalRealization& bi, double eps) {
  if (!(eps > 0) || !std::isfinite(eps)) throw Error(ErrorCode::NonPositiveEpsilon, "epsilon must be positive");
  const Eigen::Index dp = bi.dimPlus(), dm = bi.dimMinus(), m = bi.m(), p = bi.p();
  const Eigen::Index mi = m + dm + dp;
  const Eigen::Index po = p + dm + dp + m;

  Mat Bp = Mat::Zero(dp, mi);
  Bp.leftCols(m) = bi.Bplus;
  Bp.rightCols(dp) = eps * Mat::Identity(dp, dp);
  Mat Bm = Mat::Zero(dm, mi);
  Bm.leftCols(m) = bi.Bminus;
  Bm.middleCols(m, dm) = eps * Mat::Identity(dm, dm);

  Mat Cp = Mat::Zero(po, dp);
  Cp.topRows(p) = bi.Cplus;
  Cp.middleRows(p + dm, dp) = eps * Mat::Identity(dp, dp);
  Mat Cm = Mat::Zero(po, dm);
  Cm.topRows(p) = bi.Cminus;
  Cm.middleRows(p, dm) = eps * Mat::Identity(dm, dm);

  Mat D = Mat::Zero(po, mi);
  D.topLeftCorner(p, m) = bi.Dtilde;
  D.bottomLeftCorner(m, m) = eps * Mat::Identity(m, m);

  AugmentedBicausal aug;
  aug.base = bi;
  aug.epsilon = eps;
  aug.augmented = make_bicausal(bi.Aplus, Bp, Cp, D, bi.Aminus, Bm, Cm);
  for (Eigen::Index i = 0; i < m; ++i) aug.baseInputs.push_back(i);
  for (Eigen::Index i = 0; i < p; ++i) aug.baseOutputs.push_back(i);
  return aug;
}

DichotomousDecomposition from_bicausal_split(const BicausalRealization& bi, double tol) {
  StateSpaceSystem s = from_bicausal(bi, tol);
  const Eigen::Index dp = bi.dimPlus(), dm = bi.dimMinus();
  DichotomousDecomposition dec;
  dec.dimMinus = dm;
  dec.dimPlus = dp;
  dec.Aplus = bi.Aplus;
  dec.Bplus = bi.Bplus;
  dec.Cplus = bi.Cplus;
  dec.Aminus = s.A.bottomRightCorner(dm, dm);
  dec.Bminus = s.B.bottomRows(dm);
  dec.Cminus = bi.Cminus;
  dec.D = bi.Dtilde;
  dec.T = Mat::Identity(dm + dp, dm + dp);
  dec.Tinv = dec.T;
  Mat A = linalg::blockdiag(dec.Aminus, dec.Aplus);
  dec.margin = spectral_margin(A);
  return dec;
}

DichotomousDecomposition augment_decomposition(const DichotomousDecomposition& dec, double eps) {
  if (!(eps > 0) || !std::isfinite(eps)) throw Error(ErrorCode::NonPositiveEpsilon, "epsilon must be positive");
  const Eigen::Index n = dec.n(), m = dec.m(), p = dec.p(), r = dec.dimMinus, s = dec.dimPlus;
  DichotomousDecomposition a = dec;
  a.Bminus.resize(r, m + n);
  a.Bminus << dec.Bminus, eps * dec.Tinv.topRows(r);
  a.Bplus.resize(s, m + n);
  a.Bplus << dec.Bplus, eps * dec.Tinv.bottomRows(s);
  a.Cminus = Mat::Zero(p + n + m, r);
  a.Cminus.topRows(p) = dec.Cminus;
  a.Cminus.middleRows(p, n) = eps * dec.T.leftCols(r);
  a.Cplus = Mat::Zero(p + n + m, s);
  a.Cplus.topRows(p) = dec.Cplus;
  a.Cplus.middleRows(p, n) = eps * dec.T.rightCols(s);
  a.D = Mat::Zero(p + n + m, m + n);
  a.D.topLeftCorner(p, m) = dec.D;
  a.D.bottomLeftCorner(m, m) = eps * Mat::Identity(m, m);
  return a;
}

}  // namespace kyp
