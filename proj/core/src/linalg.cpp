#include "kyp/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <cmath>
#include <limits>

namespace kyp::linalg {

namespace {

// Unitary G with G* S G upper triangular and diagonal (S11, S00) for the
// 2x2 upper triangular S = [[t0, t01], [0, t1]].
Eigen::Matrix2cd swap_rotation(cplx t0, cplx t01, cplx t1) {
  Eigen::Vector2cd v(t01, t1 - t0);
  double nv = v.norm();
  Eigen::Matrix2cd G;
  if (nv == 0.0) {
    G.setIdentity();
    return G;
  }
  v /= nv;
  G.col(0) = v;
  G.col(1) << -std::conj(v(1)), std::conj(v(0));
  return G;
}

}  // namespace

OrderedSchur ordered_schur(const Mat& A, const std::function<bool(cplx)>& select) {
  const Eigen::Index n = A.rows();
  OrderedSchur out;
  if (n == 0) {
    out.Q = Mat(0, 0);
    out.R = Mat(0, 0);
    return out;
  }
  Eigen::ComplexSchur<Mat> cs(A, true);
  out.Q = cs.matrixU();
  out.R = cs.matrixT();
  Mat& R = out.R;
  Mat& Q = out.Q;

  Eigen::Index next = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (!select(R(k, k))) continue;
    for (Eigen::Index j = k; j > next; --j) {
      const Eigen::Index i = j - 1;
      Eigen::Matrix2cd G = swap_rotation(R(i, i), R(i, j), R(j, j));
      R.middleRows(i, 2) = G.adjoint() * R.middleRows(i, 2);
      R.middleCols(i, 2) = R.middleCols(i, 2) * G;
      Q.middleCols(i, 2) = Q.middleCols(i, 2) * G;
      R(j, i) = 0.0;
    }
    ++next;
  }
  out.selected = next;
  return out;
}

Mat solve_triangular_sylvester(const Mat& R11, const Mat& R22, const Mat& C) {
  const Eigen::Index s = R11.rows();
  const Eigen::Index t = R22.rows();
  Mat X(s, t);
  for (Eigen::Index k = 0; k < t; ++k) {
    Vec rhs = C.col(k);
    for (Eigen::Index l = 0; l < k; ++l) rhs += X.col(l) * R22(l, k);
    Mat M = R11;
    M.diagonal().array() -= R22(k, k);
    X.col(k) = M.triangularView<Eigen::Upper>().solve(rhs);
  }
  return X;
}

double spectral_radius(const Mat& A) {
  if (A.rows() == 0) return 0.0;
  Eigen::ComplexEigenSolver<Mat> es(A, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

Mat hermitian_part(const Mat& S) { return 0.5 * (S + S.adjoint()); }

double hermitian_defect(const Mat& S) { return (S - S.adjoint()).norm(); }

RVec hermitian_eigenvalues(const Mat& S) {
  if (S.rows() == 0) return RVec(0);
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(S), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

double min_hermitian_eigenvalue(const Mat& S) {
  if (S.rows() == 0) return std::numeric_limits<double>::infinity();
  return hermitian_eigenvalues(S)(0);
}

RVec singular_values(const Mat& M) {
  if (M.size() == 0) return RVec(0);
  Eigen::BDCSVD<Mat> svd(M);
  return svd.singularValues();
}

double sigma_max(const Mat& M) {
  RVec s = singular_values(M);
  return s.size() ? s(0) : 0.0;
}

double sigma_min(const Mat& M) {
  RVec s = singular_values(M);
  return s.size() ? s(s.size() - 1) : std::numeric_limits<double>::infinity();
}

Mat pinv(const Mat& M, double rcond) {
  if (M.size() == 0) return Mat::Zero(M.cols(), M.rows());
  Eigen::BDCSVD<Mat> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RVec& s = svd.singularValues();
  const double cut = rcond * s(0);
  RVec inv(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) inv(i) = (s(i) > cut && s(i) > 0) ? 1.0 / s(i) : 0.0;
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint();
}

Mat pinv_psd(const Mat& S, double rcond) {
  if (S.rows() == 0) return Mat(0, 0);
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(S));
  const RVec& lam = es.eigenvalues();
  const double top = lam.cwiseAbs().maxCoeff();
  const double cut = rcond * top;
  RVec inv(lam.size());
  for (Eigen::Index i = 0; i < lam.size(); ++i) inv(i) = (lam(i) > cut && lam(i) > 0) ? 1.0 / lam(i) : 0.0;
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().adjoint();
}

Mat null_basis(const Mat& M, double rcond) {
  const Eigen::Index K = M.cols();
  if (K == 0) return Mat(0, 0);
  Eigen::Index rank = 0;
  RVec s = singular_values(M);
  if (s.size() && s(0) > 0) {
    for (Eigen::Index i = 0; i < s.size(); ++i)
      if (s(i) > rcond * s(0)) ++rank;
  }
  if (rank == 0) return Mat::Identity(K, K);
  Eigen::ColPivHouseholderQR<Mat> qr(M.adjoint());
  Mat Q = qr.householderQ();
  return Q.rightCols(K - rank);
}

Mat orth(const Mat& M, double rcond) {
  if (M.cols() == 0 || M.rows() == 0) return Mat(M.rows(), 0);
  Eigen::ColPivHouseholderQR<Mat> qr(M);
  qr.setThreshold(rcond);
  const Eigen::Index r = qr.rank();
  Mat Q = qr.householderQ();
  return Q.leftCols(r);
}

Mat psd_sqrt(const Mat& S, double clip) {
  if (S.rows() == 0) return Mat(0, 0);
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(S));
  RVec lam = es.eigenvalues();
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (lam(i) < 0) {
      if (lam(i) < -clip) throw Error(ErrorCode::NotContractive, "negative eigenvalue " + std::to_string(lam(i)));
      lam(i) = 0.0;
    }
  }
  return es.eigenvectors() * lam.cwiseSqrt().asDiagonal() * es.eigenvectors().adjoint();
}

Mat blockdiag(const Mat& X, const Mat& Y) {
  Mat out = Mat::Zero(X.rows() + Y.rows(), X.cols() + Y.cols());
  out.topLeftCorner(X.rows(), X.cols()) = X;
  out.bottomRightCorner(Y.rows(), Y.cols()) = Y;
  return out;
}

bool all_finite(const Mat& M) { return M.allFinite(); }

}  // namespace kyp::linalg
