#pragma once

#include "kyp/storage.hpp"

#include <optional>
#include <string>

namespace kyp {

enum class Verdict { ContractiveCertified, StrictlyContractiveCertified, NotContractive, Inconclusive };

// "CONTRACTIVE_CERTIFIED", "STRICTLY_CONTRACTIVE_CERTIFIED", "NOT_CONTRACTIVE", "INCONCLUSIVE"
const char* to_string(Verdict v);

struct Diagnostics {
  double dichotomyMargin = 0.0;
  Eigen::Index dimMinus = 0;
  Eigen::Index dimPlus = 0;
  bool minimalityChecked = false;
  MinimalityReport minimality;
  double minResidual = 0.0;  // smallest eigenvalue of the reported residual
  double tailBound = 0.0;
  int windowN = 0;
  std::string route;   // pipeline that produced the verdict
  std::string message;
};

struct CertificationReport {
  Verdict verdict = Verdict::Inconclusive;
  double hinf = 0.0;
  std::optional<KypCertificate> certificate;
  Diagnostics diagnostics;

  bool certified() const {
    return verdict == Verdict::ContractiveCertified || verdict == Verdict::StrictlyContractiveCertified;
  }
};

struct CertifyOptions {
  double tol = default_tol();
  int N = 0;             // 0 selects the default window
  double epsilon = 0.0;  // 0 selects epsilon by search
  StorageMethod method = StorageMethod::Auto;
};

// For dichotomous certificates H lives in split coordinates with T attached;
// residualSpectrum is that of kyp_residual(sys, T^{-*} H T^{-1}, epsilon).
CertificationReport certify_standard(const StateSpaceSystem& sys, const CertifyOptions& opt = {});
CertificationReport certify_strict(const StateSpaceSystem& sys, const CertifyOptions& opt = {});
// Bicausal certificates live on (x_minus, x_plus); residualSpectrum is that of
// bicausal_kyp_residual(bi, H, epsilon).
CertificationReport certify_bicausal(const BicausalRealization& bi, bool strict, const CertifyOptions& opt = {});

// Largest 2^{-k}, k = 1..60, for which the augmented system keeps
// hinf <= (1 + hinf) / 2. Requires hinf < 1.
double choose_epsilon(const DichotomousDecomposition& dec, double hinf, double tol = default_tol());
double choose_epsilon(const BicausalRealization& bi, double hinf, double tol = default_tol());

}  // namespace kyp
