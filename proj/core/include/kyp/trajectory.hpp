#pragma once

#include "kyp/realization.hpp"

#include <string>
#include <vector>

namespace kyp {

// Finitely supported sequence: values[k - start] is the sample at time k.
struct Signal {
  int start = 0;
  std::vector<Vec> values;

  int end() const { return start + static_cast<int>(values.size()); }  // one past the last sample
};

enum class TrajectoryKind { Dichotomous, Bicausal };

// States are stored in split coordinates (x_minus, x_plus).
struct Trajectory {
  TrajectoryKind kind = TrajectoryKind::Dichotomous;
  int n0 = 0;
  std::vector<Vec> u, y;  // k in [n0, n1]
  std::vector<Vec> x;     // k in [n0, n1 + 1]
  Eigen::Index dimMinus = 0;
  double tailDecay = 0.0;

  int n1() const { return n0 + static_cast<int>(u.size()) - 1; }
  const Vec& u_at(int k) const { return u.at(static_cast<size_t>(k - n0)); }
  const Vec& y_at(int k) const { return y.at(static_cast<size_t>(k - n0)); }
  const Vec& x_at(int k) const { return x.at(static_cast<size_t>(k - n0)); }
  double input_energy() const;
  double output_energy() const;
};

// Padding is grown until the state at both window edges is below tol.
Trajectory simulate(const DichotomousDecomposition& dec, const Signal& u, double tol = default_tol());
Trajectory simulate_bicausal(const BicausalRealization& bi, const Signal& u, double tol = default_tol());

// Largest violation of the state/output equations over the window.
double trajectory_residual(const DichotomousDecomposition& dec, const Trajectory& t);
double trajectory_residual(const BicausalRealization& bi, const Trajectory& t);

// u, y from t1 for n < 0 and from t2 for n >= 0; x from t1 for n <= 0 and t2 after.
Trajectory patch(const Trajectory& t1, const Trajectory& t2, double tol = default_tol());

// x0 in split coordinates. Past input is the least-norm preimage of x0_plus,
// future input (from time 1) the least-norm preimage of x_minus(1).
Trajectory interpolate_state(const DichotomousDecomposition& dec, const Vec& x0, const Vec& u0, int N,
                             double tol = default_tol());
// Fixes x_minus(1), x_plus(0) and u(0).
Trajectory interpolate_bicausal(const BicausalRealization& bi, const Vec& xMinus, const Vec& xPlus, const Vec& u0,
                                int N, double tol = default_tol());

// r(k) = (1 - eps^2)|u(k)|^2 - |y(k)|^2 - <H x(k+1), x(k+1)> + <H x(k), x(k)> - eps^2 |x(k)|^2.
std::vector<double> dissipation_residuals(const Mat& H, const Trajectory& t, double eps = 0.0,
                                          double tol = default_tol());

// Columns n, u_1..u_m, x_1..x_n, y_1..y_p. States are mapped through T
// (pass an empty matrix to keep split coordinates).
std::string trajectory_csv(const Trajectory& t, const Mat& T);
// Reads an input file with columns n, u_1..u_m (extra columns ignored).
Signal read_input_csv(const std::string& text, Eigen::Index m);

}  // namespace kyp
