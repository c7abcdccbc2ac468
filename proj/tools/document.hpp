#pragma once

#include "kyp/certify.hpp"
#include "kyp/nonstationary.hpp"

#include <optional>
#include <stdexcept>
#include <string>

namespace kyp::io {

// Malformed or inconsistent input; what() is prefixed with "source:line:".
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class DocumentKind { Dichotomous, Bicausal, Periodic };

const char* to_string(DocumentKind k);

struct SystemDocument {
  DocumentKind kind = DocumentKind::Dichotomous;
  StateSpaceSystem sys;     // kind == Dichotomous
  BicausalRealization bi;   // kind == Bicausal
  PeriodicSystem periodic;  // kind == Periodic
  std::optional<double> tol;
  std::optional<int> windowN;
  std::optional<double> epsilon;
};

// Matrices are nested row arrays; entries are numbers or [re, im] pairs.
// A matrix with no rows is written [] and takes its column count from the
// other matrices of the document.
SystemDocument parse_document(const std::string& text, const std::string& source = "<input>");
SystemDocument read_document(const std::string& path);
std::string write_document(const SystemDocument& doc);

// Numbers are written with 15 significant digits; complex matrix entries as
// [re, im]. Output is deterministic.
std::string certificate_json(const KypCertificate& c);
std::string report_json(const CertificationReport& r);
std::string tv_certificate_json(const TvCertificate& c);

struct StoredCertificate {
  Mat H;
  Mat T;  // empty when absent
  double epsilon = 0.0;
  bool bicausal = false;
};

// Accepts a bare certificate object or a report with a "certificate" member.
StoredCertificate parse_certificate(const std::string& text, const std::string& source = "<certificate>");

std::string read_file(const std::string& path);

}  // namespace kyp::io
