#include "kyp/certify.hpp"

#include "kyp/frequency.hpp"
#include "kyp/linalg.hpp"

#include <cmath>
#include <cstdio>

namespace kyp {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::ContractiveCertified: return "CONTRACTIVE_CERTIFIED";
    case Verdict::StrictlyContractiveCertified: return "STRICTLY_CONTRACTIVE_CERTIFIED";
    case Verdict::NotContractive: return "NOT_CONTRACTIVE";
    case Verdict::Inconclusive: return "INCONCLUSIVE";
  }
  return "INCONCLUSIVE";
}

namespace {

bool recoverable(ErrorCode c) {
  return c == ErrorCode::RangeViolation || c == ErrorCode::NotContractive || c == ErrorCode::NotExactlyMinimal;
}

bool inertia_matches(const KypCertificate& c, Eigen::Index dimMinus, Eigen::Index dimPlus) {
  return c.inertia.nPlus == dimPlus && c.inertia.nMinus == dimMinus && c.inertia.nZero == 0;
}

void refresh_inertia(KypCertificate& c, double tol) { c.inertia = inertia(c.H, inertia_threshold(c.H, tol)); }

void accept(CertificationReport& r, KypCertificate c, Verdict v) {
  r.verdict = v;
  r.diagnostics.minResidual = c.min_residual();
  r.diagnostics.windowN = c.windowN;
  r.diagnostics.tailBound = c.tailBound;
  r.certificate = std::move(c);
}

void append(std::string& msg, const std::string& s) {
  if (!msg.empty()) msg += "; ";
  msg += s;
}

// Tries H_a then H_r. `finalize` recomputes residual and inertia of a candidate.
template <class System, class Finalize>
bool try_storages(const System& system, const StorageOptions& so, Eigen::Index dm, Eigen::Index dp, double tol,
                  Verdict verdict, CertificationReport& r, Finalize finalize) {
  for (int pass = 0; pass < 2; ++pass) {
    const char* name = pass == 0 ? "Ha" : "Hr";
    KypCertificate c;
    try {
      c = pass == 0 ? compute_Ha(system, so) : compute_Hr(system, so);
    } catch (const Error& e) {
      if (!recoverable(e.code())) throw;
      append(r.diagnostics.message, std::string(name) + ": " + to_string(e.code()));
      continue;
    }
    finalize(c);
    if (c.valid(tol * std::max(1.0, c.H.norm())) && inertia_matches(c, dm, dp)) {
      accept(r, std::move(c), verdict);
      return true;
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", c.min_residual());
    append(r.diagnostics.message,
           std::string(name) + ": residual or inertia check failed (min residual " + buf + ")");
  }
  return false;
}

CertificationReport strict_dichotomous(const StateSpaceSystem& sys, const DichotomousDecomposition& dec, double hinf,
                                       const CertifyOptions& opt, CertificationReport r) {
  r.hinf = hinf;
  r.diagnostics.route = "strict";
  double eps = 0.0;
  try {
    eps = opt.epsilon > 0 ? opt.epsilon : choose_epsilon(dec, hinf, opt.tol);
  } catch (const Error& e) {
    r.verdict = Verdict::Inconclusive;
    append(r.diagnostics.message, std::string("epsilon search: ") + to_string(e.code()));
    return r;
  }
  for (int attempt = 0; attempt < 8; ++attempt, eps *= 0.5) {
    DichotomousDecomposition aug = augment_decomposition(dec, eps);
    StorageOptions so{opt.N, opt.method, opt.tol, true};
    auto finalize = [&](KypCertificate& c) {
      c.epsilon = eps;
      c.strictMargin = eps * eps;
      c.residualSpectrum = linalg::hermitian_eigenvalues(kyp_residual(sys, c.original_coordinates(), eps, opt.tol));
      refresh_inertia(c, opt.tol);
    };
    if (try_storages(aug, so, dec.dimMinus, dec.dimPlus, opt.tol, Verdict::StrictlyContractiveCertified, r,
                     finalize))
      return r;
    if (opt.epsilon > 0) break;
  }
  r.verdict = Verdict::Inconclusive;
  return r;
}

CertificationReport standard_dichotomous(const StateSpaceSystem& sys, const DichotomousDecomposition& dec,
                                         const CertifyOptions& opt, CertificationReport r) {
  r.hinf = hinf_norm(dec, opt.tol);
  if (r.hinf > 1.0 + opt.tol) {
    r.verdict = Verdict::NotContractive;
    return r;
  }
  const int N = opt.N > 0 ? opt.N : make_window(dec, 0).N;
  GramianData g = build_gramians(dec, N);
  r.diagnostics.minimalityChecked = true;
  r.diagnostics.minimality = check_exact_minimality(g, opt.tol);
  r.diagnostics.windowN = N;
  r.diagnostics.tailBound = g.window.tailBound;
  if (!r.diagnostics.minimality.exact()) {
    if (r.hinf < 1.0 - opt.tol) {
      CertificationReport s = strict_dichotomous(sys, dec, r.hinf, opt, r);
      if (s.verdict == Verdict::StrictlyContractiveCertified) s.verdict = Verdict::ContractiveCertified;
      s.diagnostics.route = "standard via strict";
      return s;
    }
    r.verdict = Verdict::Inconclusive;
    append(r.diagnostics.message, "boundary case without exact minimality");
    return r;
  }
  StorageOptions so{N, opt.method, opt.tol, false};
  auto finalize = [&](KypCertificate& c) {
    c.residualSpectrum = linalg::hermitian_eigenvalues(kyp_residual(sys, c.original_coordinates(), 0.0, opt.tol));
  };
  if (!try_storages(dec, so, dec.dimMinus, dec.dimPlus, opt.tol, Verdict::ContractiveCertified, r, finalize))
    r.verdict = Verdict::Inconclusive;
  return r;
}

// Returns false (with r filled) when no dichotomy is available.
bool split_or_report(const StateSpaceSystem& sys, double tol, DichotomousDecomposition& dec, CertificationReport& r) {
  sys.validate();
  try {
    dec = dichotomy_split(sys, tol);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoDichotomy && e.code() != ErrorCode::SylvesterFailure) throw;
    r.verdict = Verdict::Inconclusive;
    r.diagnostics.dichotomyMargin = spectral_margin(sys.A);
    r.diagnostics.message = to_string(e.code());
    r.hinf = std::numeric_limits<double>::quiet_NaN();
    return false;
  }
  r.diagnostics.dichotomyMargin = dec.margin;
  r.diagnostics.dimMinus = dec.dimMinus;
  r.diagnostics.dimPlus = dec.dimPlus;
  return true;
}

double bicausal_margin(const BicausalRealization& bi) {
  double m = 1.0;
  if (bi.dimPlus()) m = std::min(m, 1.0 - linalg::spectral_radius(bi.Aplus));
  if (bi.dimMinus()) m = std::min(m, 1.0 - linalg::spectral_radius(bi.Aminus));
  return m;
}

CertificationReport strict_bicausal(const BicausalRealization& bi, const CertifyOptions& opt, CertificationReport r) {
  r.diagnostics.route = "bicausal strict";
  double eps = 0.0;
  try {
    eps = opt.epsilon > 0 ? opt.epsilon : choose_epsilon(bi, r.hinf, opt.tol);
  } catch (const Error& e) {
    r.verdict = Verdict::Inconclusive;
    append(r.diagnostics.message, std::string("epsilon search: ") + to_string(e.code()));
    return r;
  }
  for (int attempt = 0; attempt < 8; ++attempt, eps *= 0.5) {
    AugmentedBicausal aug = augment_epsilon_bicausal(bi, eps);
    StorageOptions so{opt.N, opt.method, opt.tol, true};
    auto finalize = [&](KypCertificate& c) {
      c.epsilon = eps;
      c.strictMargin = eps * eps;
      c.residualSpectrum = linalg::hermitian_eigenvalues(bicausal_kyp_residual(bi, c.H, eps, opt.tol));
      refresh_inertia(c, opt.tol);
    };
    if (try_storages(aug.augmented, so, bi.dimMinus(), bi.dimPlus(), opt.tol,
                     Verdict::StrictlyContractiveCertified, r, finalize))
      return r;
    if (opt.epsilon > 0) break;
  }
  r.verdict = Verdict::Inconclusive;
  return r;
}

}  // namespace

double choose_epsilon(const DichotomousDecomposition& dec, double hinf, double tol) {
  if (!(hinf < 1.0)) throw Error(ErrorCode::NotStrictlyContractive, "epsilon search needs hinf < 1");
  const double target = 0.5 * (1.0 + hinf);
  for (int k = 1; k <= 60; ++k) {
    const double eps = std::ldexp(1.0, -k);
    if (hinf_norm(augment_decomposition(dec, eps), tol) <= target) return eps;
  }
  throw Error(ErrorCode::NotStrictlyContractive, "no admissible epsilon found");
}

double choose_epsilon(const BicausalRealization& bi, double hinf, double tol) {
  if (!(hinf < 1.0)) throw Error(ErrorCode::NotStrictlyContractive, "epsilon search needs hinf < 1");
  const double target = 0.5 * (1.0 + hinf);
  for (int k = 1; k <= 60; ++k) {
    const double eps = std::ldexp(1.0, -k);
    if (hinf_norm(augment_epsilon_bicausal(bi, eps).augmented, tol) <= target) return eps;
  }
  throw Error(ErrorCode::NotStrictlyContractive, "no admissible epsilon found");
}

CertificationReport certify_standard(const StateSpaceSystem& sys, const CertifyOptions& opt) {
  CertificationReport r;
  r.diagnostics.route = "standard";
  DichotomousDecomposition dec;
  if (!split_or_report(sys, opt.tol, dec, r)) return r;
  return standard_dichotomous(sys, dec, opt, r);
}

CertificationReport certify_strict(const StateSpaceSystem& sys, const CertifyOptions& opt) {
  CertificationReport r;
  r.diagnostics.route = "strict";
  DichotomousDecomposition dec;
  if (!split_or_report(sys, opt.tol, dec, r)) return r;
  const double hinf = hinf_norm(dec, opt.tol);
  if (hinf > 1.0 + opt.tol) {
    r.hinf = hinf;
    r.verdict = Verdict::NotContractive;
    return r;
  }
  if (hinf >= 1.0 - opt.tol) return standard_dichotomous(sys, dec, opt, r);
  return strict_dichotomous(sys, dec, hinf, opt, r);
}

CertificationReport certify_bicausal(const BicausalRealization& bi, bool strict, const CertifyOptions& opt) {
  CertificationReport r;
  r.diagnostics.route = "bicausal";
  r.diagnostics.dichotomyMargin = bicausal_margin(bi);
  r.diagnostics.dimMinus = bi.dimMinus();
  r.diagnostics.dimPlus = bi.dimPlus();
  r.hinf = hinf_norm(bi, opt.tol);
  if (r.hinf > 1.0 + opt.tol) {
    r.verdict = Verdict::NotContractive;
    return r;
  }
  if (strict && r.hinf < 1.0 - opt.tol) return strict_bicausal(bi, opt, r);

  const int N = opt.N > 0 ? opt.N : make_window(bi, 0).N;
  GramianData g = build_gramians(bi, N);
  r.diagnostics.minimalityChecked = true;
  r.diagnostics.minimality = check_exact_minimality(g, opt.tol);
  r.diagnostics.windowN = N;
  r.diagnostics.tailBound = g.window.tailBound;
  if (!r.diagnostics.minimality.exact()) {
    if (r.hinf < 1.0 - opt.tol) {
      CertificationReport s = strict_bicausal(bi, opt, r);
      if (s.verdict == Verdict::StrictlyContractiveCertified) s.verdict = Verdict::ContractiveCertified;
      s.diagnostics.route = "bicausal via strict";
      return s;
    }
    r.verdict = Verdict::Inconclusive;
    append(r.diagnostics.message, "boundary case without exact minimality");
    return r;
  }
  StorageOptions so{N, opt.method, opt.tol, false};
  if (!try_storages(bi, so, bi.dimMinus(), bi.dimPlus(), opt.tol, Verdict::ContractiveCertified, r,
                    [](KypCertificate&) {}))
    r.verdict = Verdict::Inconclusive;
  return r;
}

}  // namespace kyp
