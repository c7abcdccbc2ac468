#pragma once

#include "kyp/common.hpp"

#include <vector>

namespace kyp {

// x(k+1) = A x(k) + B u(k),  y(k) = C x(k) + D u(k).
struct StateSpaceSystem {
  Mat A, B, C, D;

  StateSpaceSystem() = default;
  StateSpaceSystem(Mat A_, Mat B_, Mat C_, Mat D_);

  Eigen::Index n() const { return A.rows(); }
  Eigen::Index m() const { return B.cols(); }
  Eigen::Index p() const { return C.rows(); }

  // Throws NonSquare, DimensionMismatch or NonFinite.
  void validate() const;
  // [[A, B], [C, D]]
  Mat system_matrix() const;
};

// Split coordinates are ordered x = (x_minus, x_plus).
struct DichotomousDecomposition {
  Eigen::Index dimMinus = 0;
  Eigen::Index dimPlus = 0;
  Mat Aminus, Aplus;  // |eig| > 1, |eig| < 1
  Mat Bminus, Bplus;
  Mat Cminus, Cplus;
  Mat D;
  Mat T;     // original = T * split
  Mat Tinv;
  double margin = 0.0;

  Eigen::Index n() const { return dimMinus + dimPlus; }
  Eigen::Index m() const { return D.cols(); }
  Eigen::Index p() const { return D.rows(); }
};

// Causal part (Aplus, Bplus, Cplus, Dtilde) runs forward in time, the
// anticausal part x_-(k) = Aminus x_-(k+1) + Bminus u(k) runs backward.
// State ordering is (x_minus, x_plus).
struct BicausalRealization {
  Mat Aplus, Bplus, Cplus, Dtilde;
  Mat Aminus, Bminus, Cminus;
  Mat Dhat;  // Cminus * Bminus + Dtilde

  Eigen::Index dimMinus() const { return Aminus.rows(); }
  Eigen::Index dimPlus() const { return Aplus.rows(); }
  Eigen::Index n() const { return dimMinus() + dimPlus(); }
  Eigen::Index m() const { return Dtilde.cols(); }
  Eigen::Index p() const { return Dtilde.rows(); }
};

// Checks shapes, finiteness and stability of both state operators, and fills Dhat.
BicausalRealization make_bicausal(Mat Aplus, Mat Bplus, Mat Cplus, Mat Dtilde, Mat Aminus, Mat Bminus,
                                  Mat Cminus);

struct AugmentedSystem {
  StateSpaceSystem base;
  double epsilon = 0.0;
  StateSpaceSystem augmented;
  // Positions of the base inputs/outputs inside the augmented ones; the
  // state is shared.
  std::vector<Eigen::Index> baseInputs;
  std::vector<Eigen::Index> baseOutputs;
};

struct AugmentedBicausal {
  BicausalRealization base;
  double epsilon = 0.0;
  BicausalRealization augmented;
  std::vector<Eigen::Index> baseInputs;
  std::vector<Eigen::Index> baseOutputs;
};

// min over eigenvalues of | |lambda| - 1 |.
double spectral_margin(const Mat& A);

DichotomousDecomposition dichotomy_split(const StateSpaceSystem& sys, double tol = default_tol());

// The system in split coordinates: blockdiag(Aminus, Aplus), [Bminus; Bplus], [Cminus Cplus], D.
StateSpaceSystem split_system(const DichotomousDecomposition& dec);

BicausalRealization to_bicausal(const DichotomousDecomposition& dec, const Mat& D);
BicausalRealization to_bicausal(const DichotomousDecomposition& dec);

// State ordering of the result is (x_plus, x_minus).
StateSpaceSystem from_bicausal(const BicausalRealization& bi, double tol = default_tol());
// Same realization with state ordering (x_minus, x_plus), i.e. already split.
DichotomousDecomposition from_bicausal_split(const BicausalRealization& bi, double tol = default_tol());

// B_eps = [B, eps I], C_eps = [C; eps I; 0], D_eps = [[D, 0], [0, 0], [eps I, 0]].
AugmentedSystem augment_epsilon(const StateSpaceSystem& sys, double eps);

// augment_epsilon of the original system, expressed in the split coordinates of dec.
DichotomousDecomposition augment_decomposition(const DichotomousDecomposition& dec, double eps);

// Inputs u + w_minus + w_plus, outputs y + eps x_minus + eps x_plus + eps u.
AugmentedBicausal augment_epsilon_bicausal(const BicausalRealization& bi, double eps);

}  // namespace kyp
