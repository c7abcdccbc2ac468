#include "kyp/trajectory.hpp"

#include "kyp/linalg.hpp"
#include "kyp/storage.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace kyp {

namespace {

double decay_rate(const Mat& Aforward, const Mat& Abackward) {
  const double r0 = std::max(linalg::spectral_radius(Aforward), linalg::spectral_radius(Abackward));
  return r0 + (1.0 - r0) / 10.0;
}

int initial_padding(double rho, double tol) {
  if (rho <= 0) return 1;
  return std::max(1, static_cast<int>(std::ceil(std::log(tol) / std::log(rho))));
}

Signal padded(const Signal& u, int pad, Eigen::Index m) {
  Signal s;
  s.start = u.start - pad;
  s.values.assign(u.values.size() + 2 * static_cast<size_t>(pad), Vec::Zero(m));
  for (size_t i = 0; i < u.values.size(); ++i) s.values[i + static_cast<size_t>(pad)] = u.values[i];
  return s;
}

void check_signal(const Signal& u, Eigen::Index m) {
  for (const Vec& v : u.values)
    if (v.size() != m) throw Error(ErrorCode::DimensionMismatch, "input sample has wrong dimension");
}

// Anticausal part x_-(k) = Am x_-(k+1) + Bm u(k) from zero at the right edge,
// causal part x_+(k+1) = Ap x_+(k) + Bp u(k) from zero at the left edge.
template <class StepMinus>
Trajectory run(const Signal& s, Eigen::Index dm, const Mat& Ap, const Mat& Bp, StepMinus step_minus) {
  const size_t L = s.values.size();
  const Eigen::Index dp = Ap.rows();
  Trajectory t;
  t.n0 = s.start;
  t.u = s.values;
  t.dimMinus = dm;
  t.x.assign(L + 1, Vec::Zero(dm + dp));
  Vec xp = Vec::Zero(dp);
  for (size_t i = 0; i < L; ++i) {
    t.x[i].tail(dp) = xp;
    xp = Ap * xp + Bp * s.values[i];
  }
  t.x[L].tail(dp) = xp;
  Vec xm = Vec::Zero(dm);
  for (size_t i = L; i-- > 0;) {
    xm = step_minus(xm, s.values[i]);
    t.x[i].head(dm) = xm;
  }
  t.tailDecay = std::max(t.x.front().norm(), t.x.back().norm());
  return t;
}

std::string format_scalar(cplx v) {
  char buf[80];
  if (std::abs(v.imag()) <= 1e-14 * (1.0 + std::abs(v.real())))
    std::snprintf(buf, sizeof buf, "%.15g", v.real());
  else
    std::snprintf(buf, sizeof buf, "%.15g%+.15gi", v.real(), v.imag());
  return buf;
}

cplx parse_scalar(const std::string& tok) {
  const char* s = tok.c_str();
  char* end = nullptr;
  double re = std::strtod(s, &end);
  if (end == s) throw Error(ErrorCode::InvalidArgument, "not a number: '" + tok + "'");
  while (*end == ' ') ++end;
  if (*end == '\0') return {re, 0.0};
  if (*end == 'i' && end[1] == '\0') return {0.0, re};
  const char* rest = end;
  double im = std::strtod(rest, &end);
  if (end == rest || *end != 'i' || end[1] != '\0') throw Error(ErrorCode::InvalidArgument, "not a number: '" + tok + "'");
  return {re, im};
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

void check_selfadjoint(const Mat& H, double tol) {
  if (H.rows() != H.cols()) throw Error(ErrorCode::NonSquare, "H must be square");
  if (linalg::hermitian_defect(H) > tol * std::max(1.0, H.norm()))
    throw Error(ErrorCode::NotSelfadjoint, "H differs from its adjoint");
}

}  // namespace

double Trajectory::input_energy() const {
  double e = 0;
  for (const Vec& v : u) e += v.squaredNorm();
  return e;
}

double Trajectory::output_energy() const {
  double e = 0;
  for (const Vec& v : y) e += v.squaredNorm();
  return e;
}

Trajectory simulate(const DichotomousDecomposition& dec, const Signal& u, double tol) {
  check_signal(u, dec.m());
  const Eigen::Index dm = dec.dimMinus;
  Eigen::PartialPivLU<Mat> lu;
  Mat AmInv(dm, dm);
  if (dm > 0) {
    lu.compute(dec.Aminus);
    AmInv = lu.inverse();
  }
  int pad = initial_padding(decay_rate(dec.Aplus, AmInv), tol);
  for (;;) {
    Signal s = padded(u, pad, dec.m());
    Trajectory t = run(s, dm, dec.Aplus, dec.Bplus, [&](const Vec& xnext, const Vec& uk) -> Vec {
      if (dm == 0) return Vec(0);
      return lu.solve(xnext - dec.Bminus * uk);
    });
    t.kind = TrajectoryKind::Dichotomous;
    t.y.resize(t.u.size());
    for (size_t i = 0; i < t.u.size(); ++i)
      t.y[i] = dec.Cminus * t.x[i].head(dm) + dec.Cplus * t.x[i].tail(dec.dimPlus) + dec.D * t.u[i];
    if (t.tailDecay <= tol) return t;
    if (pad > (1 << 16)) throw Error(ErrorCode::WindowTooSmall, "edge state " + std::to_string(t.tailDecay));
    pad *= 2;
  }
}

Trajectory simulate_bicausal(const BicausalRealization& bi, const Signal& u, double tol) {
  check_signal(u, bi.m());
  const Eigen::Index dm = bi.dimMinus();
  int pad = initial_padding(decay_rate(bi.Aplus, bi.Aminus), tol);
  for (;;) {
    Signal s = padded(u, pad, bi.m());
    Trajectory t = run(s, dm, bi.Aplus, bi.Bplus,
                       [&](const Vec& xnext, const Vec& uk) -> Vec { return bi.Aminus * xnext + bi.Bminus * uk; });
    t.kind = TrajectoryKind::Bicausal;
    t.y.resize(t.u.size());
    for (size_t i = 0; i < t.u.size(); ++i)
      t.y[i] = bi.Cminus * t.x[i].head(dm) + bi.Cplus * t.x[i].tail(bi.dimPlus()) + bi.Dtilde * t.u[i];
    if (t.tailDecay <= tol) return t;
    if (pad > (1 << 16)) throw Error(ErrorCode::WindowTooSmall, "edge state " + std::to_string(t.tailDecay));
    pad *= 2;
  }
}

double trajectory_residual(const DichotomousDecomposition& dec, const Trajectory& t) {
  StateSpaceSystem s = split_system(dec);
  double worst = 0;
  for (int k = t.n0; k <= t.n1(); ++k) {
    worst = std::max(worst, (t.x_at(k + 1) - s.A * t.x_at(k) - s.B * t.u_at(k)).norm());
    worst = std::max(worst, (t.y_at(k) - s.C * t.x_at(k) - s.D * t.u_at(k)).norm());
  }
  return worst;
}

double trajectory_residual(const BicausalRealization& bi, const Trajectory& t) {
  const Eigen::Index dm = bi.dimMinus(), dp = bi.dimPlus();
  double worst = 0;
  for (int k = t.n0; k <= t.n1(); ++k) {
    const Vec& x = t.x_at(k);
    const Vec& xn = t.x_at(k + 1);
    worst = std::max(worst, (x.head(dm) - bi.Aminus * xn.head(dm) - bi.Bminus * t.u_at(k)).norm());
    worst = std::max(worst, (xn.tail(dp) - bi.Aplus * x.tail(dp) - bi.Bplus * t.u_at(k)).norm());
    worst = std::max(worst,
                     (t.y_at(k) - bi.Cminus * x.head(dm) - bi.Cplus * x.tail(dp) - bi.Dtilde * t.u_at(k)).norm());
  }
  return worst;
}

Trajectory patch(const Trajectory& t1, const Trajectory& t2, double tol) {
  if (t1.kind != t2.kind || t1.dimMinus != t2.dimMinus || t1.x.front().size() != t2.x.front().size())
    throw Error(ErrorCode::DimensionMismatch, "trajectories have different layouts");
  if (t1.n0 > 0 || t1.n1() + 1 < 0 || t2.n0 > 0 || t2.n1() + 1 < 0)
    throw Error(ErrorCode::InvalidArgument, "both windows must contain time 0");
  const double gap = (t1.x_at(0) - t2.x_at(0)).norm();
  if (gap > tol) throw Error(ErrorCode::StateMismatch, "state mismatch " + std::to_string(gap) + " at time 0");
  Trajectory t;
  t.kind = t1.kind;
  t.dimMinus = t1.dimMinus;
  t.n0 = t1.n0;
  t.tailDecay = std::max(t1.tailDecay, t2.tailDecay);
  for (int k = t1.n0; k < 0; ++k) {
    t.u.push_back(t1.u_at(k));
    t.y.push_back(t1.y_at(k));
  }
  for (int k = 0; k <= t2.n1(); ++k) {
    t.u.push_back(t2.u_at(k));
    t.y.push_back(t2.y_at(k));
  }
  for (int k = t1.n0; k <= 0; ++k) t.x.push_back(t1.x_at(k));
  for (int k = 1; k <= t2.n1() + 1; ++k) t.x.push_back(t2.x_at(k));
  return t;
}

namespace {

Signal interpolating_input(const GramianData& g, const Vec& xPlus, const Vec& xMinusNext, const Vec& u0,
                           Eigen::Index m, int N, double tol) {
  if (g.WcPlus.rows() > 0 && !(g.sigmaMin.cPlus > tol))
    throw Error(ErrorCode::NotExactlyControllable, "truncated forward controllability operator is not surjective");
  if (g.WcMinus.rows() > 0 && !(g.sigmaMin.cMinus > tol))
    throw Error(ErrorCode::NotExactlyControllable, "truncated backward controllability operator is not surjective");
  Vec up = Vec::Zero(N * m), uf = Vec::Zero(N * m);
  if (g.WcPlus.rows() > 0) up = linalg::pinv(g.WcPlus) * xPlus;
  if (g.WcMinus.rows() > 0) uf = linalg::pinv(g.WcMinus) * xMinusNext;
  Signal s;
  s.start = -N;
  for (int j = 0; j < N; ++j) s.values.push_back(up.segment(j * m, m));
  s.values.push_back(u0);
  for (int j = 0; j < N; ++j) s.values.push_back(uf.segment(j * m, m));
  return s;
}

}  // namespace

Trajectory interpolate_state(const DichotomousDecomposition& dec, const Vec& x0, const Vec& u0, int N, double tol) {
  if (x0.size() != dec.n() || u0.size() != dec.m())
    throw Error(ErrorCode::DimensionMismatch, "interpolation targets have wrong dimension");
  GramianData g = build_gramians(dec, N);
  const Eigen::Index dm = dec.dimMinus;
  Vec xmNext = dec.Aminus * x0.head(dm) + dec.Bminus * u0;
  return simulate(dec, interpolating_input(g, x0.tail(dec.dimPlus), xmNext, u0, dec.m(), N, tol), tol);
}

Trajectory interpolate_bicausal(const BicausalRealization& bi, const Vec& xMinus, const Vec& xPlus, const Vec& u0,
                                int N, double tol) {
  if (xMinus.size() != bi.dimMinus() || xPlus.size() != bi.dimPlus() || u0.size() != bi.m())
    throw Error(ErrorCode::DimensionMismatch, "interpolation targets have wrong dimension");
  GramianData g = build_gramians(bi, N);
  return simulate_bicausal(bi, interpolating_input(g, xPlus, xMinus, u0, bi.m(), N, tol), tol);
}

std::vector<double> dissipation_residuals(const Mat& H, const Trajectory& t, double eps, double tol) {
  check_selfadjoint(H, tol);
  if (!t.x.empty() && t.x.front().size() != H.rows())
    throw Error(ErrorCode::DimensionMismatch, "H does not match the state dimension");
  const Mat Hs = linalg::hermitian_part(H);
  auto S = [&](const Vec& x) { return x.dot(Hs * x).real(); };
  const double e2 = eps * eps;
  std::vector<double> r;
  r.reserve(t.u.size());
  for (int k = t.n0; k <= t.n1(); ++k) {
    const Vec& x = t.x_at(k);
    r.push_back((1.0 - e2) * t.u_at(k).squaredNorm() - t.y_at(k).squaredNorm() - S(t.x_at(k + 1)) + S(x) -
                e2 * x.squaredNorm());
  }
  return r;
}

std::string trajectory_csv(const Trajectory& t, const Mat& T) {
  const Eigen::Index m = t.u.empty() ? 0 : t.u.front().size();
  const Eigen::Index p = t.y.empty() ? 0 : t.y.front().size();
  const Eigen::Index n = t.x.empty() ? 0 : (T.size() ? T.rows() : t.x.front().size());
  std::ostringstream os;
  os << "n";
  for (Eigen::Index i = 1; i <= m; ++i) os << ",u_" << i;
  for (Eigen::Index i = 1; i <= n; ++i) os << ",x_" << i;
  for (Eigen::Index i = 1; i <= p; ++i) os << ",y_" << i;
  os << "\n";
  for (int k = t.n0; k <= t.n1(); ++k) {
    os << k;
    for (Eigen::Index i = 0; i < m; ++i) os << "," << format_scalar(t.u_at(k)(i));
    Vec x = T.size() ? Vec(T * t.x_at(k)) : t.x_at(k);
    for (Eigen::Index i = 0; i < n; ++i) os << "," << format_scalar(x(i));
    for (Eigen::Index i = 0; i < p; ++i) os << "," << format_scalar(t.y_at(k)(i));
    os << "\n";
  }
  return os.str();
}

Signal read_input_csv(const std::string& text, Eigen::Index m) {
  std::istringstream is(text);
  std::string line;
  std::map<int, Vec> rows;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> tok;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) tok.push_back(trim(cell));
    if (lineno == 1 && !tok.empty() && tok[0] == "n") continue;
    if (static_cast<Eigen::Index>(tok.size()) < 1 + m)
      throw Error(ErrorCode::InvalidArgument, "line " + std::to_string(lineno) + ": expected n and " +
                                                  std::to_string(m) + " input columns");
    try {
      char* end = nullptr;
      long k = std::strtol(tok[0].c_str(), &end, 10);
      if (end == tok[0].c_str() || *end != '\0') throw Error(ErrorCode::InvalidArgument, "bad time index");
      Vec v(m);
      for (Eigen::Index i = 0; i < m; ++i) v(i) = parse_scalar(tok[static_cast<size_t>(1 + i)]);
      if (rows.count(static_cast<int>(k))) throw Error(ErrorCode::InvalidArgument, "duplicate time index");
      rows[static_cast<int>(k)] = v;
    } catch (const Error& e) {
      throw Error(ErrorCode::InvalidArgument, "line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  Signal s;
  if (rows.empty()) return s;
  s.start = rows.begin()->first;
  const int last = rows.rbegin()->first;
  for (int k = s.start; k <= last; ++k) {
    auto it = rows.find(k);
    s.values.push_back(it == rows.end() ? Vec(Vec::Zero(m)) : it->second);
  }
  return s;
}

}  // namespace kyp
