#pragma once

#include "kyp/realization.hpp"

#include <string>
#include <utility>
#include <vector>

namespace kyp {

// Geometric envelope ||F_k|| <= c * rho^|k|.
struct TailEnvelope {
  double rho = 0.0;
  double c = 0.0;
};

// Index window [-N, N-1] with a bound on everything the truncation drops.
struct TruncationWindow {
  int N = 0;
  TailEnvelope envelope;
  // c * rho^N / (1 - rho) plus a floating-point floor for the retained
  // coefficients (see tail_bound).
  double tailBound = 0.0;
  std::string warning;
};

struct LaurentSlice {
  TruncationWindow window;
  int kmin = 0;
  std::vector<Mat> coeffs;  // coeffs[k - kmin]
  double tailBound = 0.0;

  const Mat& at(int k) const { return coeffs.at(static_cast<size_t>(k - kmin)); }
  int kmax() const { return kmin + static_cast<int>(coeffs.size()) - 1; }
};

// Corner blocks of the truncated Laurent matrix. Ttilde has indices
// [-N,-1]^2, T has [0,N-1]^2, Htilde rows [-N,-1] x columns [0,N-1],
// H rows [0,N-1] x columns [-N,-1].
struct OperatorQuadruple {
  Mat Ttilde, T, Htilde, H;
  TruncationWindow window;
};

struct LaurentMatrix {
  Mat L;  // block (i, j) = F_{i-j}, i, j in [-N, N-1]
  TruncationWindow window;
};

Mat eval_transfer(const StateSpaceSystem& sys, cplx z, double tol = default_tol());
Mat eval_transfer(const DichotomousDecomposition& dec, cplx z, double tol = default_tol());
Mat eval_transfer(const BicausalRealization& bi, cplx z, double tol = default_tol());

Mat laurent_coeff(const DichotomousDecomposition& dec, int k);
Mat laurent_coeff(const BicausalRealization& bi, int k);
// All coefficients with index in [kmin, kmax], by power recurrences.
std::vector<Mat> laurent_coeffs(const BicausalRealization& bi, int kmin, int kmax);

TailEnvelope tail_envelope(const BicausalRealization& bi);
double tail_bound(const TailEnvelope& env, int N, Eigen::Index m, Eigen::Index p);
// Smallest N with rho^N <= 1e-10, capped at 4096.
int default_window_size(const TailEnvelope& env);
// N <= 0 selects default_window_size.
TruncationWindow make_window(const BicausalRealization& bi, int N = 0);
TruncationWindow make_window(const DichotomousDecomposition& dec, int N = 0);

LaurentSlice laurent_slice(const BicausalRealization& bi, int N);
LaurentSlice laurent_slice(const DichotomousDecomposition& dec, int N);

// Np x Nm block Toeplitz matrix with block (i, j) = F_{i-j}, i, j in [0, N-1].
Mat toeplitz_block(const LaurentSlice& slice, int N);

double hinf_norm(const StateSpaceSystem& sys, double tol = default_tol());
double hinf_norm(const DichotomousDecomposition& dec, double tol = default_tol());
double hinf_norm(const BicausalRealization& bi, double tol = default_tol());

// (theta, sigma_max(F(e^{i theta}))) on `points` equispaced angles in [0, 2 pi).
std::vector<std::pair<double, double>> frequency_response(const BicausalRealization& bi, int points = 1024);
std::string frequency_csv(const std::vector<std::pair<double, double>>& samples);

LaurentMatrix build_laurent(const BicausalRealization& bi, int N);
LaurentMatrix build_laurent(const DichotomousDecomposition& dec, int N);
OperatorQuadruple build_quadruple(const BicausalRealization& bi, int N);
OperatorQuadruple build_quadruple(const DichotomousDecomposition& dec, int N);

}  // namespace kyp
