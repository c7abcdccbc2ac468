// Acceptance sweep: one PASS/FAIL line per criterion, nonzero exit on failure.
#include "kyp/certify.hpp"
#include "kyp/frequency.hpp"
#include "kyp/linalg.hpp"
#include "kyp/nonstationary.hpp"
#include "kyp/storage.hpp"
#include "kyp/trajectory.hpp"
#include "support/random_systems.hpp"

#include <Eigen/QR>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

using namespace kyp;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = true;
  std::string detail;
};

int rank_of(const Mat& M) {
  Eigen::ColPivHouseholderQR<Mat> qr(M);
  qr.setThreshold(1e-10);
  return static_cast<int>(qr.rank());
}

// Random system with hinf in [lo, hi], B and C* of full rank.
StateSpaceSystem sweep_system(testgen::SystemGenerator& gen, const testgen::SystemSpec& spec, double lo, double hi) {
  for (;;) {
    StateSpaceSystem sys = gen.system(spec, gen.uniform(lo, hi));
    if (rank_of(sys.B) == std::min(sys.n(), sys.m()) && rank_of(sys.C) == std::min(sys.n(), sys.p())) return sys;
  }
}

Signal random_signal(testgen::SystemGenerator& gen, int start, int len, Eigen::Index m) {
  Signal s;
  s.start = start;
  for (int k = 0; k < len; ++k) s.values.push_back(gen.gaussian_vec(m));
  return s;
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

struct Sweep {
  std::vector<StateSpaceSystem> systems;
  std::vector<CertificationReport> reports;
  double seconds = 0.0;
};

Sweep run_sweep() {
  testgen::SystemGenerator gen(1001);
  testgen::SystemSpec spec;
  Sweep s;
  for (int i = 0; i < 200; ++i) s.systems.push_back(sweep_system(gen, spec, 0.3, 0.95));
  const auto t0 = Clock::now();
  for (const StateSpaceSystem& sys : s.systems) s.reports.push_back(certify_strict(sys));
  s.seconds = seconds_since(t0);
  return s;
}

Outcome criterion1(const Sweep& s) {
  Outcome o;
  int failures = 0;
  double worst = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < s.systems.size(); ++i) {
    const CertificationReport& r = s.reports[i];
    if (r.verdict != Verdict::StrictlyContractiveCertified || !r.certificate) {
      ++failures;
      continue;
    }
    const KypCertificate& c = *r.certificate;
    const double res = linalg::min_hermitian_eigenvalue(kyp_residual(s.systems[i], c.original_coordinates(), c.epsilon));
    worst = std::min(worst, res);
    if (res < -1e-7) ++failures;
  }
  o.pass = failures == 0 && s.seconds <= 60.0;
  o.detail = std::to_string(s.systems.size() - failures) + "/200 certified, min residual " + fmt("%.3g", worst) +
             ", " + fmt("%.1f s", s.seconds);
  return o;
}

Outcome criterion2(const Sweep& s) {
  int failures = 0, certified = 0;
  for (size_t i = 0; i < s.systems.size(); ++i) {
    const CertificationReport& r = s.reports[i];
    if (!r.certificate) continue;
    ++certified;
    const Mat H = r.certificate->original_coordinates();
    const Inertia in = inertia(H, inertia_threshold(H));
    if (!(in == Inertia{r.diagnostics.dimPlus, r.diagnostics.dimMinus, 0})) ++failures;
  }
  return {failures == 0 && certified == 200,
          std::to_string(certified) + " certified, " + std::to_string(failures) + " inertia mismatches"};
}

Outcome criterion3() {
  testgen::SystemGenerator gen(1003);
  testgen::SystemSpec spec;
  int failures = 0;
  double worstOrder = std::numeric_limits<double>::infinity(), worstRes = worstOrder;
  for (int i = 0; i < 50; ++i) {
    DichotomousDecomposition dec = dichotomy_split(sweep_system(gen, spec, 0.3, 0.95));
    try {
      KypCertificate a = compute_Ha(dec), r = compute_Hr(dec);
      StateSpaceSystem split = split_system(dec);
      const double order = linalg::min_hermitian_eigenvalue(r.H - a.H);
      worstOrder = std::min(worstOrder, order);
      bool ok = order >= -1e-6;
      for (double lambda : {0.25, 0.5, 0.75}) {
        const double res = linalg::min_hermitian_eigenvalue(kyp_residual(split, lambda * a.H + (1 - lambda) * r.H));
        worstRes = std::min(worstRes, res);
        ok = ok && res >= -1e-6;
      }
      failures += !ok;
    } catch (const Error&) {
      ++failures;
    }
  }
  return {failures == 0, "min eig(Hr-Ha) " + fmt("%.3g", worstOrder) + ", min combination residual " +
                             fmt("%.3g", worstRes) + ", " + std::to_string(failures) + " failures"};
}

Outcome criterion4() {
  testgen::SystemGenerator gen(1004);
  testgen::SystemSpec spec;
  int failures = 0;
  double worstRatio = 0.0;
  for (int i = 0; i < 50; ++i) {
    DichotomousDecomposition dec = dichotomy_split(sweep_system(gen, spec, 0.3, 0.95));
    GramianData g = build_gramians(dec, 128);
    OperatorQuadruple q = build_quadruple(dec, 128);
    const double plus = (q.H - g.WoPlus * g.WcPlus).norm(), minus = (q.Htilde - g.WoMinus * g.WcMinus).norm();
    worstRatio = std::max(worstRatio, std::max(plus, minus) / g.window.tailBound);
    failures += plus > g.window.tailBound || minus > g.window.tailBound;
  }
  return {failures == 0, "max error/tailBound " + fmt("%.3g", worstRatio) + ", " + std::to_string(failures) +
                             " failures"};
}

Outcome criterion5() {
  testgen::SystemGenerator gen(1005);
  testgen::SystemSpec spec;
  const int N = 64;
  int failures = 0;
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    DichotomousDecomposition dec = dichotomy_split(sweep_system(gen, spec, 0.3, 0.95));
    Signal u = random_signal(gen, -8, 16, dec.m());
    Trajectory t = simulate(dec, u, 1e-12);
    LaurentMatrix L = build_laurent(dec, N);
    Vec uv = Vec::Zero(2 * N * dec.m());
    for (int k = -8; k < 8; ++k) uv.segment((k + N) * dec.m(), dec.m()) = u.values[k + 8];
    const Vec y = L.L * uv;
    double err = 0.0;
    for (int k = -N; k < N; ++k) {
      const Vec yk = k >= t.n0 && k <= t.n1() ? t.y_at(k) : Vec(Vec::Zero(dec.p()));
      err += (y.segment((k + N) * dec.p(), dec.p()) - yk).squaredNorm();
    }
    err = std::sqrt(err);
    worst = std::max(worst, err);
    failures += err > 1e-8 + L.window.tailBound;
  }
  return {failures == 0, "max error " + fmt("%.3g", worst) + ", " + std::to_string(failures) + " failures"};
}

Outcome criterion6(const Sweep& s) {
  testgen::SystemGenerator gen(1006);
  int failures = 0, trajectories = 0, systems = 0;
  double worstGain = -std::numeric_limits<double>::infinity(), worstRes = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < s.systems.size() && systems < 50; ++i) {
    if (!s.reports[i].certificate) continue;
    ++systems;
    const KypCertificate& c = *s.reports[i].certificate;
    const Mat H = c.original_coordinates();
    DichotomousDecomposition dec = dichotomy_split(s.systems[i]);
    for (int k = 0; k < 50; ++k) {
      Trajectory t = simulate(dec, random_signal(gen, -8, 16, dec.m()));
      for (Vec& x : t.x) x = dec.T * x;
      const double gain = std::sqrt(t.output_energy()) - std::sqrt(t.input_energy());
      worstGain = std::max(worstGain, gain);
      bool ok = gain <= 1e-8;
      for (double r : dissipation_residuals(H, t, c.epsilon)) {
        worstRes = std::min(worstRes, r);
        ok = ok && r >= -1e-8;
      }
      failures += !ok;
      ++trajectories;
    }
  }
  return {failures == 0 && systems == 50,
          std::to_string(trajectories) + " trajectories on " + std::to_string(systems) + " systems, max |y|-|u| " +
              fmt("%.3g", worstGain) + ", min residual " + fmt("%.3g", worstRes)};
}

Outcome criterion7() {
  testgen::SystemGenerator gen(1007);
  testgen::SystemSpec spec;
  int failures = 0, count = 0;
  double worst = 0.0;
  while (count < 50) {
    Eigen::Index dimMinus = 0;
    StateSpaceSystem sys = gen.system(spec, gen.uniform(0.3, 0.95), &dimMinus);
    if (dimMinus == 0) continue;
    ++count;
    DichotomousDecomposition dec = dichotomy_split(sys);
    BicausalRealization bi = to_bicausal(dec);
    CertificationReport r = certify_bicausal(bi, false);
    const Mat H = r.certificate ? r.certificate->H : linalg::hermitian_part(gen.gaussian(bi.n(), bi.n()));
    const Mat Rb = bicausal_kyp_residual(bi, H);
    const Mat Rm = bicausal_congruence(bi);
    const Mat Rs = kyp_residual(split_system(from_bicausal_split(bi)), H);
    const double rel = (Rb - Rm.adjoint() * Rs * Rm).norm() / (1 + Rb.norm());
    worst = std::max(worst, rel);
    failures += rel > 1e-9 || !r.certificate;
  }
  return {failures == 0, "max relative mismatch " + fmt("%.3g", worst) + ", " + std::to_string(failures) +
                             " failures"};
}

Outcome criterion8() {
  testgen::SystemGenerator gen(1008);
  testgen::SystemSpec spec;
  spec.margin = 0.3;
  int failures = 0;
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    DichotomousDecomposition dec = dichotomy_split(sweep_system(gen, spec, 0.3, 0.95));
    StorageOptions o1, o2;
    o1.N = 256;
    o2.N = 512;
    try {
      const double da = (compute_Ha(dec, o1).H - compute_Ha(dec, o2).H).norm();
      const double dr = (compute_Hr(dec, o1).H - compute_Hr(dec, o2).H).norm();
      worst = std::max(worst, std::max(da, dr));
      failures += da > 1e-6 || dr > 1e-6;
    } catch (const Error&) {
      ++failures;
    }
  }
  return {failures == 0, "10 systems, max |H(256)-H(512)| " + fmt("%.3g", worst) + ", " + std::to_string(failures) +
                             " failures"};
}

Outcome criterion9() {
  testgen::SystemGenerator gen(1009);
  testgen::SystemSpec spec;
  int failures = 0, runs = 0;
  double worstSpread = 0.0, worstGap = 0.0, worstRes = std::numeric_limits<double>::infinity();
  for (int period : {1, 2, 4}) {
    for (int i = 0; i < 4; ++i) {
      StateSpaceSystem sys = sweep_system(gen, spec, 0.3, 0.95);
      ++runs;
      try {
        PeriodicSystem ps = PeriodicSystem::constant(sys, period);
        TvCertificate tv = solve_tv_kyp(ps);
        CertifyOptions opt;
        opt.N = tv.windowN;
        opt.epsilon = tv.epsilon;
        CertificationReport r = certify_strict(sys, opt);
        if (!r.certificate) {
          ++failures;
          continue;
        }
        const Mat H = r.certificate->original_coordinates();
        bool ok = true;
        for (const Mat& Hk : tv.H) {
          const double spread = (Hk - tv.H[0]).norm(), gap = (Hk - H).norm();
          worstSpread = std::max(worstSpread, spread);
          worstGap = std::max(worstGap, gap);
          ok = ok && spread <= 1e-8 && gap <= 1e-8;
        }
        for (const Mat& R : tv_kyp_residuals(ps, tv)) {
          const double mn = linalg::min_hermitian_eigenvalue(R);
          worstRes = std::min(worstRes, mn);
          ok = ok && mn > 0.0;
        }
        failures += !ok;
      } catch (const Error&) {
        ++failures;
      }
    }
  }
  return {failures == 0, std::to_string(runs) + " runs, max spread " + fmt("%.3g", worstSpread) +
                             ", max gap to stationary " + fmt("%.3g", worstGap) + ", min step residual " +
                             fmt("%.3g", worstRes)};
}

Outcome criterion10() {
  testgen::SystemGenerator gen(1010);
  testgen::SystemSpec spec;
  int failures = 0;
  for (int i = 0; i < 20; ++i) {
    StateSpaceSystem sys = sweep_system(gen, spec, 1.1, 2.0);
    bool ok = certify_standard(sys).verdict == Verdict::NotContractive &&
              certify_strict(sys).verdict == Verdict::NotContractive;
    // A certificate of the rescaled contractive system, with its inertia flipped.
    StateSpaceSystem small = sys;
    const double h = hinf_norm(sys);
    small.C *= 0.9 / h;
    small.D *= 0.9 / h;
    CertificationReport r = certify_standard(small);
    if (!r.certificate) {
      ++failures;
      continue;
    }
    const Mat flipped = -r.certificate->original_coordinates();
    ok = ok && linalg::min_hermitian_eigenvalue(kyp_residual(small, flipped)) < 0.0;
    ok = ok && linalg::min_hermitian_eigenvalue(kyp_residual(sys, flipped)) < 0.0;
    failures += !ok;
  }
  return {failures == 0, "20 systems, " + std::to_string(failures) + " failures"};
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  const Sweep sweep = run_sweep();
  std::vector<std::function<Outcome()>> criteria = {
      [&] { return criterion1(sweep); }, [&] { return criterion2(sweep); }, criterion3, criterion4, criterion5,
      [&] { return criterion6(sweep); }, criterion7, criterion8, criterion9, criterion10};
  bool all = true;
  for (size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    all = all && o.pass;
    std::printf("criterion %zu: %s %s\n", k + 1, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("total: %.1f s\n", seconds_since(t0));
  return all ? 0 : 1;
}
