#pragma once

#include "kyp/frequency.hpp"
#include "kyp/realization.hpp"

#include <string>

namespace kyp {

// Smallest singular values of Wc+, Wc-, Wo+, Wo-; +inf for an empty block.
struct SurjectivityMargins {
  double cPlus = 0.0;
  double cMinus = 0.0;
  double oPlus = 0.0;
  double oMinus = 0.0;
};

// Truncations on the window [-N, N-1].
//   WcPlus  (dimPlus x Nm):  columns A+^{-j-1} B+ for j = -N..-1
//   WcMinus (dimMinus x Nm): columns -A-^{-j-1} B- for j = 0..N-1
//   WoPlus  (Np x dimPlus):  rows C+ A+^i for i = 0..N-1
//   WoMinus (Np x dimMinus): rows C- A-^i for i = -N..-1
// The bicausal forms are the same maps written with the anticausal operators.
struct GramianData {
  Mat WcPlus, WcMinus, WoPlus, WoMinus;
  TruncationWindow window;
  SurjectivityMargins sigmaMin;
};

GramianData build_gramians(const DichotomousDecomposition& dec, int N);
GramianData build_gramians(const BicausalRealization& bi, int N);

struct MinimalityReport {
  bool controllablePlus = false;
  bool controllableMinus = false;
  bool observablePlus = false;
  bool observableMinus = false;
  SurjectivityMargins margins;

  bool exact() const { return controllablePlus && controllableMinus && observablePlus && observableMinus; }
};

MinimalityReport check_exact_minimality(const GramianData& g, double tol = default_tol());

// (I - T*T)^{1/2}. Throws NotContractive if sigma_max(T) > 1 + tol.
Mat defect(const Mat& T, double tol = default_tol());

struct DouglasFactor {
  Mat X;
  double residual = 0.0;     // ||W - Dop X||_F
  double rangeDefect = 0.0;  // ||(I - P_range(Dop)) X||_F
};

// X = pinv(Dop) W. Throws RangeViolation if the residual exceeds tol ||W||_F.
DouglasFactor douglas_factor(const Mat& Dop, const Mat& W, double tol = default_tol());

struct Inertia {
  Eigen::Index nPlus = 0;
  Eigen::Index nMinus = 0;
  Eigen::Index nZero = 0;

  bool operator==(const Inertia&) const = default;
};

Inertia inertia(const Mat& H, double tol = default_tol());
// max(tol, 100 eps ||H||_F): eigenvalues below it are not resolved from roundoff.
double inertia_threshold(const Mat& H, double tol = default_tol());

// Explicit: the closed-form block formulas with the defect operators and the
// projections P_a / P_r. Constrained: the same truncated quadratic form written
// as an equality-constrained maximisation over the window inputs and solved
// through a Cholesky factor of I - T*T. Auto tries Constrained and falls back
// to Explicit when I - T*T is not numerically positive definite.
enum class StorageMethod { Auto, Explicit, Constrained };

struct StorageOptions {
  int N = 0;  // 0 selects the default window
  StorageMethod method = StorageMethod::Auto;
  double tol = default_tol();
  bool requireMinimality = true;
};

struct KypCertificate {
  Mat H;                         // on (x_minus, x_plus)
  Mat Hminus, H0, Hplus;         // H = [[Hminus, H0], [H0*, Hplus]]
  RVec residualSpectrum;         // ascending; epsilon already folded into the residual
  Inertia inertia;
  double epsilon = 0.0;
  double strictMargin = 0.0;     // epsilon^2 for strict certificates
  Mat T;                         // original state = T * certificate state
  int windowN = 0;
  double tailBound = 0.0;
  bool bicausal = false;
  std::string storage;           // "Ha" or "Hr"
  std::string method;            // "explicit" or "constrained"

  double min_residual() const;
  bool valid(double tol) const { return min_residual() >= -tol; }
  // T^{-*} H T^{-1}
  Mat original_coordinates() const;
};

// Dichotomous certificates are in split coordinates; residualSpectrum is that
// of kyp_residual(split_system(dec), H, 0). Bicausal certificates use
// bicausal_kyp_residual.
KypCertificate compute_Ha(const DichotomousDecomposition& dec, const StorageOptions& opt = {});
KypCertificate compute_Ha(const BicausalRealization& bi, const StorageOptions& opt = {});
KypCertificate compute_Hr(const DichotomousDecomposition& dec, const StorageOptions& opt = {});
KypCertificate compute_Hr(const BicausalRealization& bi, const StorageOptions& opt = {});

// Storage matrices on (x_minus, x_plus) straight from window data.
Mat available_storage(const GramianData& g, const LaurentSlice& F, StorageMethod method, double tol,
                      std::string* usedMethod = nullptr);
Mat required_storage(const GramianData& g, const LaurentSlice& F, StorageMethod method, double tol,
                     std::string* usedMethod = nullptr);

// I - T*T for T = toeplitz_block(F, N), assembled from the coefficients
// without forming T.
Mat toeplitz_defect_square(const LaurentSlice& F, int N);

// blockdiag(H, I) - M* blockdiag(H, I) M - eps^2 I, M = [[A, B], [C, D]].
Mat kyp_residual(const StateSpaceSystem& sys, const Mat& H, double eps = 0.0, double tol = default_tol());

// Residual of the bicausal inequality on (x_minus(1), x_plus(0), u(0)).
Mat bicausal_kyp_residual(const BicausalRealization& bi, const Mat& H, double eps = 0.0,
                          double tol = default_tol());

// [[Aminus, 0, Bminus], [0, I, 0], [0, 0, I]]: maps (x_minus(1), x_plus(0), u(0))
// to (x_minus(0), x_plus(0), u(0)), so that the bicausal residual equals
// R* kyp_residual(from_bicausal_split(bi)) R when Aminus is invertible.
Mat bicausal_congruence(const BicausalRealization& bi);

}  // namespace kyp
