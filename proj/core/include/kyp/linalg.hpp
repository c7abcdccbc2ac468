#pragma once

#include "kyp/common.hpp"

#include <functional>

namespace kyp::linalg {

struct OrderedSchur {
  Mat Q;  // unitary, A = Q R Q*
  Mat R;  // upper triangular
  Eigen::Index selected = 0;  // leading eigenvalues satisfying the predicate
};

// Complex Schur form with the eigenvalues accepted by `select` moved to the
// leading diagonal positions by adjacent Givens swaps.
OrderedSchur ordered_schur(const Mat& A, const std::function<bool(cplx)>& select);

// Solves R11 X - X R22 = C for upper triangular R11, R22.
Mat solve_triangular_sylvester(const Mat& R11, const Mat& R22, const Mat& C);

double spectral_radius(const Mat& A);

// Eigenvalues of the Hermitian part of S, ascending.
RVec hermitian_eigenvalues(const Mat& S);
double min_hermitian_eigenvalue(const Mat& S);

Mat hermitian_part(const Mat& S);
double hermitian_defect(const Mat& S);  // ||S - S*||_F

RVec singular_values(const Mat& M);
double sigma_max(const Mat& M);
// Smallest of the min(rows, cols) singular values; +inf for an empty matrix.
double sigma_min(const Mat& M);

// Moore-Penrose inverse, singular values below rcond * sigma_max dropped.
Mat pinv(const Mat& M, double rcond = 1e-10);
// Pseudoinverse of a Hermitian positive semidefinite matrix via its eigenbasis.
Mat pinv_psd(const Mat& S, double rcond = 1e-10);

Mat null_basis(const Mat& M, double rcond = 1e-10);
Mat orth(const Mat& M, double rcond = 1e-10);

// Principal square root of a Hermitian PSD matrix. Eigenvalues in [-clip, 0)
// are set to zero; anything more negative raises NotContractive.
Mat psd_sqrt(const Mat& S, double clip);

Mat blockdiag(const Mat& X, const Mat& Y);

bool all_finite(const Mat& M);

}  // namespace kyp::linalg
