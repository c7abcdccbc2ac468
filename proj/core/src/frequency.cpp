#include "kyp/frequency.hpp"

#include "kyp/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>

namespace kyp {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// z * C (I - z A)^{-1} B, with a pole-proximity check on the resolvent.
Mat resolvent_term(const Mat& A, const Mat& B, const Mat& C, cplx z, double tol) {
  const Eigen::Index n = A.rows();
  if (n == 0) return Mat::Zero(C.rows(), B.cols());
  Mat M = Mat::Identity(n, n) - z * A;
  Eigen::PartialPivLU<Mat> lu(M);
  const double norm1 = M.cwiseAbs().colwise().sum().maxCoeff();
  const double rc = lu.rcond();
  if (!(rc > 0) || 1.0 / (rc * norm1) > 1.0 / tol)
    throw Error(ErrorCode::PoleProximity, "resolvent norm exceeds 1/tol");
  return z * (C * lu.solve(B));
}

// C (I - w A)^{-1} B
Mat anticausal_term(const Mat& A, const Mat& B, const Mat& C, cplx w, double tol) {
  const Eigen::Index n = A.rows();
  if (n == 0) return Mat::Zero(C.rows(), B.cols());
  Mat M = Mat::Identity(n, n) - w * A;
  Eigen::PartialPivLU<Mat> lu(M);
  const double norm1 = M.cwiseAbs().colwise().sum().maxCoeff();
  const double rc = lu.rcond();
  if (!(rc > 0) || 1.0 / (rc * norm1) > 1.0 / tol)
    throw Error(ErrorCode::PoleProximity, "resolvent norm exceeds 1/tol");
  return C * lu.solve(B);
}

double top_singular_value(const Mat& F) {
  if (F.size() == 0) return 0.0;
  Mat G = F.rows() < F.cols() ? Mat(F * F.adjoint()) : Mat(F.adjoint() * F);
  Eigen::SelfAdjointEigenSolver<Mat> es(G, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues()(G.rows() - 1)));
}

double maximize_on_circle(const std::function<double(double)>& f, double tol) {
  constexpr int kGrid = 1024;
  constexpr int kPeaks = 5;
  std::vector<double> g(kGrid);
  for (int j = 0; j < kGrid; ++j) g[j] = f(kTwoPi * j / kGrid);
  double best = *std::max_element(g.begin(), g.end());

  std::vector<int> peaks;
  for (int j = 0; j < kGrid; ++j) {
    const double l = g[(j + kGrid - 1) % kGrid], r = g[(j + 1) % kGrid];
    if (g[j] >= l && g[j] >= r) peaks.push_back(j);
  }
  std::sort(peaks.begin(), peaks.end(), [&](int a, int b) { return g[a] > g[b] || (g[a] == g[b] && a < b); });
  if (peaks.size() > kPeaks) peaks.resize(kPeaks);

  const double h = kTwoPi / kGrid;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int j : peaks) {
    double a = kTwoPi * j / kGrid - h, b = kTwoPi * j / kGrid + h;
    double c = b - phi * (b - a), d = a + phi * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < 80 && (b - a) > 1e-13; ++it) {
      if (fc > fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - phi * (b - a);
        fc = f(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + phi * (b - a);
        fd = f(d);
      }
      if (std::abs(fc - fd) <= 0.01 * tol * std::max(fc, fd) && (b - a) < 1e-8) break;
    }
    best = std::max({best, fc, fd});
  }
  return best;
}

}  // namespace

Mat eval_transfer(const StateSpaceSystem& sys, cplx z, double tol) {
  sys.validate();
  return sys.D + resolvent_term(sys.A, sys.B, sys.C, z, tol);
}

Mat eval_transfer(const DichotomousDecomposition& dec, cplx z, double tol) {
  return dec.D + resolvent_term(dec.Aminus, dec.Bminus, dec.Cminus, z, tol) +
         resolvent_term(dec.Aplus, dec.Bplus, dec.Cplus, z, tol);
}

Mat eval_transfer(const BicausalRealization& bi, cplx z, double tol) {
  Mat F = bi.Dtilde + resolvent_term(bi.Aplus, bi.Bplus, bi.Cplus, z, tol);
  if (bi.dimMinus() > 0) {
    if (z == cplx(0.0)) throw Error(ErrorCode::PoleProximity, "anticausal part is singular at z = 0");
    F += anticausal_term(bi.Aminus, bi.Bminus, bi.Cminus, 1.0 / z, tol);
  }
  return F;
}

Mat laurent_coeff(const DichotomousDecomposition& dec, int k) {
  const Eigen::Index r = dec.dimMinus;
  if (k > 0) {
    Mat P = dec.Bplus;
    for (int i = 0; i < k - 1; ++i) P = dec.Aplus * P;
    return dec.Cplus * P;
  }
  if (r == 0) return k == 0 ? dec.D : Mat(Mat::Zero(dec.p(), dec.m()));
  Eigen::PartialPivLU<Mat> lu(dec.Aminus);
  // A_-^{k-1} B_- for k <= 0 is (A_-^{-1})^{1-k} B_-.
  Mat P = dec.Bminus;
  for (int i = 0; i < 1 - k; ++i) P = lu.solve(P);
  if (k == 0) return dec.D - dec.Cminus * P;
  return -dec.Cminus * P;
}

Mat laurent_coeff(const BicausalRealization& bi, int k) { return laurent_coeffs(bi, k, k).front(); }

std::vector<Mat> laurent_coeffs(const BicausalRealization& bi, int kmin, int kmax) {
  std::vector<Mat> out(static_cast<size_t>(std::max(0, kmax - kmin + 1)));
  if (out.empty()) return out;
  const Mat zero = Mat::Zero(bi.p(), bi.m());
  if (kmin <= 0 && kmax >= 0) out[static_cast<size_t>(-kmin)] = bi.Dhat;
  if (kmax > 0) {
    Mat P = bi.Bplus;
    for (int k = 1; k <= kmax; ++k) {
      if (k >= kmin) out[static_cast<size_t>(k - kmin)] = bi.dimPlus() ? Mat(bi.Cplus * P) : zero;
      if (k < kmax) P = bi.Aplus * P;
    }
  }
  if (kmin < 0) {
    Mat Q = bi.Aminus * bi.Bminus;
    for (int k = 1; k <= -kmin; ++k) {
      if (-k <= kmax) out[static_cast<size_t>(-k - kmin)] = bi.dimMinus() ? Mat(bi.Cminus * Q) : zero;
      if (k < -kmin) Q = bi.Aminus * Q;
    }
  }
  return out;
}

TailEnvelope tail_envelope(const BicausalRealization& bi) {
  const double r0 = std::max(linalg::spectral_radius(bi.Aplus), linalg::spectral_radius(bi.Aminus));
  TailEnvelope env;
  env.rho = r0 + (1.0 - r0) / 10.0;
  constexpr int k0 = 50;
  std::vector<Mat> F = laurent_coeffs(bi, -k0, k0);
  for (int k = -k0; k <= k0; ++k) {
    const double nk = linalg::sigma_max(F[static_cast<size_t>(k + k0)]);
    env.c = std::max(env.c, nk / std::pow(env.rho, std::abs(k)));
  }
  return env;
}

double tail_bound(const TailEnvelope& env, int N, Eigen::Index m, Eigen::Index p) {
  const double geometric = env.c * std::pow(env.rho, N) / (1.0 - env.rho);
  // Retained coefficients are themselves computed in floating point; a bound
  // stated below that resolution would not be a bound on computed data.
  const double dim = static_cast<double>(std::max<Eigen::Index>(1, std::max(m, p)));
  const double floor = std::numeric_limits<double>::epsilon() * env.c * N * dim /
                       ((1.0 - env.rho) * (1.0 - env.rho));
  return geometric + floor;
}

int default_window_size(const TailEnvelope& env) {
  if (env.rho <= 0) return 1;
  const double n = std::ceil(std::log(1e-10) / std::log(env.rho));
  return static_cast<int>(std::clamp(n, 1.0, 4096.0));
}

TruncationWindow make_window(const BicausalRealization& bi, int N) {
  TruncationWindow w;
  w.envelope = tail_envelope(bi);
  if (N <= 0) {
    const double want = std::ceil(std::log(1e-10) / std::log(w.envelope.rho));
    N = default_window_size(w.envelope);
    if (want > 4096) w.warning = "window capped at N = 4096; tail bound exceeds target";
  }
  w.N = N;
  w.tailBound = tail_bound(w.envelope, N, bi.m(), bi.p());
  return w;
}

TruncationWindow make_window(const DichotomousDecomposition& dec, int N) { return make_window(to_bicausal(dec), N); }

LaurentSlice laurent_slice(const BicausalRealization& bi, int N) {
  LaurentSlice s;
  s.window = make_window(bi, N);
  s.kmin = -2 * s.window.N;
  s.coeffs = laurent_coeffs(bi, -2 * s.window.N, 2 * s.window.N);
  s.tailBound = s.window.tailBound;
  return s;
}

LaurentSlice laurent_slice(const DichotomousDecomposition& dec, int N) { return laurent_slice(to_bicausal(dec), N); }

Mat toeplitz_block(const LaurentSlice& slice, int N) {
  const Eigen::Index p = slice.coeffs.front().rows(), m = slice.coeffs.front().cols();
  Mat T(N * p, N * m);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) T.block(i * p, j * m, p, m) = slice.at(i - j);
  return T;
}

double hinf_norm(const StateSpaceSystem& sys, double tol) { return hinf_norm(dichotomy_split(sys, tol), tol); }

double hinf_norm(const DichotomousDecomposition& dec, double tol) {
  return maximize_on_circle([&](double t) { return top_singular_value(eval_transfer(dec, std::polar(1.0, t), tol)); },
                            tol);
}

double hinf_norm(const BicausalRealization& bi, double tol) {
  return maximize_on_circle([&](double t) { return top_singular_value(eval_transfer(bi, std::polar(1.0, t), tol)); },
                            tol);
}

std::vector<std::pair<double, double>> frequency_response(const BicausalRealization& bi, int points) {
  std::vector<std::pair<double, double>> out;
  out.reserve(static_cast<size_t>(points));
  for (int j = 0; j < points; ++j) {
    const double t = kTwoPi * j / points;
    out.emplace_back(t, top_singular_value(eval_transfer(bi, std::polar(1.0, t))));
  }
  return out;
}

std::string frequency_csv(const std::vector<std::pair<double, double>>& samples) {
  std::ostringstream os;
  os << "theta,sigma_max\n";
  char buf[96];
  for (const auto& [t, s] : samples) {
    std::snprintf(buf, sizeof buf, "%.15g,%.15g\n", t, s);
    os << buf;
  }
  return os.str();
}

LaurentMatrix build_laurent(const BicausalRealization& bi, int N) {
  if (N < 1) throw Error(ErrorCode::InvalidArgument, "window half-width must be at least 1");
  LaurentSlice s = laurent_slice(bi, N);
  const Eigen::Index p = bi.p(), m = bi.m();
  LaurentMatrix out;
  out.window = s.window;
  out.L.resize(2 * N * p, 2 * N * m);
  for (int i = -N; i < N; ++i)
    for (int j = -N; j < N; ++j) out.L.block((i + N) * p, (j + N) * m, p, m) = s.at(i - j);
  return out;
}

LaurentMatrix build_laurent(const DichotomousDecomposition& dec, int N) { return build_laurent(to_bicausal(dec), N); }

OperatorQuadruple build_quadruple(const BicausalRealization& bi, int N) {
  LaurentMatrix lm = build_laurent(bi, N);
  const Eigen::Index p = bi.p(), m = bi.m();
  OperatorQuadruple q;
  q.window = lm.window;
  q.Ttilde = lm.L.topLeftCorner(N * p, N * m);
  q.Htilde = lm.L.topRightCorner(N * p, N * m);
  q.H = lm.L.bottomLeftCorner(N * p, N * m);
  q.T = lm.L.bottomRightCorner(N * p, N * m);
  return q;
}

OperatorQuadruple build_quadruple(const DichotomousDecomposition& dec, int N) {
  return build_quadruple(to_bicausal(dec), N);
}

}  // namespace kyp
