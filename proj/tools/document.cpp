#include "document.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <utility>
#include <vector>

namespace kyp::io {

using nlohmann::json;

const char* to_string(DocumentKind k) {
  switch (k) {
    case DocumentKind::Dichotomous: return "dichotomous";
    case DocumentKind::Bicausal: return "bicausal";
    case DocumentKind::Periodic: return "periodic";
  }
  return "dichotomous";
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

// ---- parsing ----

struct Context {
  const std::string& text;
  const std::string& source;

  int line_of_key(const std::string& key) const {
    const std::string needle = "\"" + key + "\"";
    const auto pos = text.find(needle);
    if (pos == std::string::npos) return 1;
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
  }
  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw InputError(source + ":" + std::to_string(line_of_key(key)) + ": " + (key.empty() ? "" : "field '" + key + "': ") +
                     what);
  }
};

cplx parse_entry(const json& e, const Context& ctx, const std::string& key) {
  if (e.is_number()) return {e.get<double>(), 0.0};
  if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number())
    return {e[0].get<double>(), e[1].get<double>()};
  ctx.fail(key, "matrix entries must be numbers or [re, im] pairs");
}

struct RawMatrix {
  Mat M;
  bool noRows = false;
};

RawMatrix parse_matrix(const json& j, const Context& ctx, const std::string& key) {
  if (!j.is_array()) ctx.fail(key, "expected a matrix (array of rows)");
  RawMatrix r;
  if (j.empty()) {
    r.noRows = true;
    return r;
  }
  const size_t rows = j.size();
  if (!j[0].is_array()) ctx.fail(key, "expected a matrix (array of rows)");
  const size_t cols = j[0].size();
  r.M.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols)
      ctx.fail(key, "row " + std::to_string(i) + " has a different length than row 0");
    for (size_t c = 0; c < cols; ++c)
      r.M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = parse_entry(j[i][c], ctx, key);
  }
  for (Eigen::Index i = 0; i < r.M.size(); ++i)
    if (!std::isfinite(r.M.data()[i].real()) || !std::isfinite(r.M.data()[i].imag()))
      ctx.fail(key, "non-finite entry");
  return r;
}

const json& member(const json& doc, const Context& ctx, const std::string& key) {
  auto it = doc.find(key);
  if (it == doc.end()) ctx.fail("", "missing field '" + key + "'");
  return *it;
}

RawMatrix field_matrix(const json& doc, const Context& ctx, const std::string& key) {
  return parse_matrix(member(doc, ctx, key), ctx, key);
}

Mat shaped(const RawMatrix& r, Eigen::Index cols) { return r.noRows ? Mat(0, cols) : r.M; }

Eigen::Index cols_of(const RawMatrix& a, const RawMatrix& b) {
  if (!a.noRows) return a.M.cols();
  if (!b.noRows) return b.M.cols();
  return 0;
}

Eigen::Index rows_of(const RawMatrix& a, const RawMatrix& b) {
  if (!a.noRows) return a.M.rows();
  if (!b.noRows) return b.M.rows();
  return 0;
}

template <class F>
auto guarded(const Context& ctx, const std::string& key, F f) {
  try {
    return f();
  } catch (const Error& e) {
    ctx.fail(key, e.what());
  }
}

StateSpaceSystem system_from(const json& A, const json& B, const json& C, const json& D, const Context& ctx,
                             const std::string& suffix) {
  RawMatrix a = parse_matrix(A, ctx, "A" + suffix), b = parse_matrix(B, ctx, "B" + suffix);
  RawMatrix c = parse_matrix(C, ctx, "C" + suffix), d = parse_matrix(D, ctx, "D" + suffix);
  const Eigen::Index n = a.noRows ? 0 : a.M.rows();
  const Eigen::Index m = cols_of(d, b);
  const Eigen::Index p = rows_of(d, c);
  Mat Am = shaped(a, n), Bm = shaped(b, m), Cm = c.noRows ? Mat(0, n) : c.M, Dm = shaped(d, m);
  if (Am.rows() != Am.cols()) ctx.fail("A" + suffix, "must be square");
  if (Bm.rows() != n) ctx.fail("B" + suffix, "expected " + std::to_string(n) + " rows");
  if (Cm.cols() != n) ctx.fail("C" + suffix, "expected " + std::to_string(n) + " columns");
  if (Bm.cols() != m) ctx.fail("B" + suffix, "expected " + std::to_string(m) + " columns");
  if (Dm.rows() != p || Cm.rows() != p)
    ctx.fail(Dm.rows() != p ? "D" + suffix : "C" + suffix, "expected " + std::to_string(p) + " rows");
  return guarded(ctx, "A" + suffix, [&] { return StateSpaceSystem(Am, Bm, Cm, Dm); });
}

void read_overrides(const json& doc, const Context& ctx, SystemDocument& out) {
  if (auto it = doc.find("tol"); it != doc.end()) {
    if (!it->is_number() || !(it->get<double>() > 0)) ctx.fail("tol", "must be a positive number");
    out.tol = it->get<double>();
  }
  if (auto it = doc.find("window_N"); it != doc.end()) {
    if (!it->is_number_integer() || it->get<long long>() < 1 || it->get<long long>() > 4096)
      ctx.fail("window_N", "must be an integer in [1, 4096]");
    out.windowN = static_cast<int>(it->get<long long>());
  }
  if (auto it = doc.find("epsilon"); it != doc.end()) {
    if (!it->is_number() || !(it->get<double>() > 0)) ctx.fail("epsilon", "must be a positive number");
    out.epsilon = it->get<double>();
  }
}

// ---- writing ----

std::string num(double x) {
  if (!std::isfinite(x)) return "null";
  if (x == 0.0) x = 0.0;  // no negative zero
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", x);
  return buf;
}

std::string quote(const std::string& s) { return json(s).dump(); }

std::string pair(cplx z) { return "[" + num(z.real()) + ", " + num(z.imag()) + "]"; }

std::string entry(cplx z, bool pairs) { return pairs || z.imag() != 0.0 ? pair(z) : num(z.real()); }

std::string pad(int indent) { return std::string(static_cast<size_t>(indent), ' '); }

// One row per line.
std::string matrix(const Mat& M, int indent, bool pairs) {
  if (M.rows() == 0) return "[]";
  std::string s = "[\n";
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    s += pad(indent + 2) + "[";
    for (Eigen::Index j = 0; j < M.cols(); ++j) s += (j ? ", " : "") + entry(M(i, j), pairs);
    s += i + 1 < M.rows() ? "],\n" : "]\n";
  }
  return s + pad(indent) + "]";
}

std::string vector(const RVec& v) {
  std::string s = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? ", " : "") + num(v(i));
  return s + "]";
}

using Field = std::pair<std::string, std::string>;

std::string object(const std::vector<Field>& fields, int indent) {
  if (fields.empty()) return "{}";
  std::string s = "{\n";
  for (size_t i = 0; i < fields.size(); ++i)
    s += pad(indent + 2) + quote(fields[i].first) + ": " + fields[i].second + (i + 1 < fields.size() ? ",\n" : "\n");
  return s + pad(indent) + "}";
}

std::string boolean(bool b) { return b ? "true" : "false"; }

std::string inertia_json(const Inertia& in) {
  return "{\"n_plus\": " + std::to_string(in.nPlus) + ", \"n_minus\": " + std::to_string(in.nMinus) +
         ", \"n_zero\": " + std::to_string(in.nZero) + "}";
}

std::string certificate_body(const KypCertificate& c, int indent) {
  std::vector<Field> f{
      {"H", matrix(c.H, indent + 2, true)},
      {"dim_minus", std::to_string(c.Hminus.rows())},
      {"residual_spectrum", vector(c.residualSpectrum)},
      {"inertia", inertia_json(c.inertia)},
      {"epsilon", num(c.epsilon)},
      {"strict_margin", num(c.strictMargin)},
      {"window_N", std::to_string(c.windowN)},
      {"tail_bound", num(c.tailBound)},
      {"coordinates_T", matrix(c.T, indent + 2, true)},
      {"bicausal", boolean(c.bicausal)},
      {"storage", quote(c.storage)},
      {"method", quote(c.method)},
  };
  return object(f, indent);
}

std::string minimality_json(const Diagnostics& d) {
  if (!d.minimalityChecked) return "null";
  const auto& r = d.minimality;
  return "{\"controllable_plus\": " + boolean(r.controllablePlus) + ", \"controllable_minus\": " +
         boolean(r.controllableMinus) + ", \"observable_plus\": " + boolean(r.observablePlus) +
         ", \"observable_minus\": " + boolean(r.observableMinus) + ", \"sigma_min\": [" + num(r.margins.cPlus) +
         ", " + num(r.margins.cMinus) + ", " + num(r.margins.oPlus) + ", " + num(r.margins.oMinus) + "]}";
}

std::string report_body(const CertificationReport& r, int indent) {
  const Diagnostics& d = r.diagnostics;
  std::vector<Field> diag{
      {"dichotomy_margin", num(d.dichotomyMargin)},
      {"dim_minus", std::to_string(d.dimMinus)},
      {"dim_plus", std::to_string(d.dimPlus)},
      {"minimality", minimality_json(d)},
      {"min_residual", r.certificate ? num(d.minResidual) : "null"},
      {"tail_bound", num(d.tailBound)},
      {"window_N", std::to_string(d.windowN)},
      {"route", quote(d.route)},
      {"message", quote(d.message)},
  };
  std::vector<Field> f{
      {"verdict", quote(to_string(r.verdict))},
      {"hinf", num(r.hinf)},
      {"epsilon", r.certificate ? num(r.certificate->epsilon) : "null"},
      {"diagnostics", object(diag, indent + 2)},
      {"certificate", r.certificate ? certificate_body(*r.certificate, indent + 2) : "null"},
  };
  return object(f, indent);
}

}  // namespace

SystemDocument parse_document(const std::string& text, const std::string& source) {
  Context ctx{text, source};
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const size_t pos = std::min(e.byte, text.size());
    const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos > 0 ? pos - 1 : 0), '\n'));
    throw InputError(source + ":" + std::to_string(line) + ": JSON syntax error: " + e.what());
  }
  if (!doc.is_object()) throw InputError(source + ":1: top level must be an object");
  SystemDocument out;
  const json& kind = member(doc, ctx, "kind");
  if (!kind.is_string()) ctx.fail("kind", "must be a string");
  const std::string k = kind.get<std::string>();
  read_overrides(doc, ctx, out);

  if (k == "dichotomous") {
    out.kind = DocumentKind::Dichotomous;
    out.sys = system_from(member(doc, ctx, "A"), member(doc, ctx, "B"), member(doc, ctx, "C"), member(doc, ctx, "D"),
                          ctx, "");
  } else if (k == "bicausal") {
    out.kind = DocumentKind::Bicausal;
    RawMatrix ap = field_matrix(doc, ctx, "Aplus"), bp = field_matrix(doc, ctx, "Bplus");
    RawMatrix cp = field_matrix(doc, ctx, "Cplus"), dt = field_matrix(doc, ctx, "Dtilde");
    RawMatrix am = field_matrix(doc, ctx, "Aminus"), bm = field_matrix(doc, ctx, "Bminus");
    RawMatrix cm = field_matrix(doc, ctx, "Cminus");
    const Eigen::Index m = dt.noRows ? cols_of(bp, bm) : dt.M.cols();
    const Eigen::Index p = dt.noRows ? rows_of(cp, cm) : dt.M.rows();
    const Eigen::Index ns = ap.noRows ? 0 : ap.M.rows(), na = am.noRows ? 0 : am.M.rows();
    auto rowsOr = [](const RawMatrix& r, Eigen::Index p_, Eigen::Index c) { return r.noRows ? Mat(p_, c) : r.M; };
    out.bi = guarded(ctx, "Aplus", [&] {
      return make_bicausal(shaped(ap, ns), shaped(bp, m), rowsOr(cp, p, ns), dt.noRows ? Mat(0, m) : dt.M,
                           shaped(am, na), shaped(bm, m), rowsOr(cm, p, na));
    });
  } else if (k == "periodic") {
    out.kind = DocumentKind::Periodic;
    const json& per = member(doc, ctx, "period");
    if (!per.is_number_integer() || per.get<long long>() < 1) ctx.fail("period", "must be a positive integer");
    const auto P = static_cast<size_t>(per.get<long long>());
    for (const char* key : {"A", "B", "C", "D"}) {
      const json& arr = member(doc, ctx, key);
      if (!arr.is_array() || arr.size() != P)
        ctx.fail(key, "must be an array of " + std::to_string(P) + " matrices");
    }
    for (size_t i = 0; i < P; ++i) {
      const std::string suffix = "[" + std::to_string(i) + "]";
      StateSpaceSystem s = system_from(doc["A"][i], doc["B"][i], doc["C"][i], doc["D"][i], ctx, suffix);
      out.periodic.A.push_back(s.A);
      out.periodic.B.push_back(s.B);
      out.periodic.C.push_back(s.C);
      out.periodic.D.push_back(s.D);
    }
    guarded(ctx, "A", [&] {
      out.periodic.validate();
      return 0;
    });
  } else {
    ctx.fail("kind", "unknown kind '" + k + "' (expected dichotomous, bicausal or periodic)");
  }
  return out;
}

SystemDocument read_document(const std::string& path) { return parse_document(read_file(path), path); }

std::string write_document(const SystemDocument& doc) {
  std::vector<Field> f{{"kind", quote(to_string(doc.kind))}};
  auto add = [&](const char* key, const Mat& M) { f.emplace_back(key, matrix(M, 2, false)); };
  switch (doc.kind) {
    case DocumentKind::Dichotomous:
      add("A", doc.sys.A);
      add("B", doc.sys.B);
      add("C", doc.sys.C);
      add("D", doc.sys.D);
      break;
    case DocumentKind::Bicausal:
      add("Aplus", doc.bi.Aplus);
      add("Bplus", doc.bi.Bplus);
      add("Cplus", doc.bi.Cplus);
      add("Dtilde", doc.bi.Dtilde);
      add("Aminus", doc.bi.Aminus);
      add("Bminus", doc.bi.Bminus);
      add("Cminus", doc.bi.Cminus);
      break;
    case DocumentKind::Periodic: {
      f.emplace_back("period", std::to_string(doc.periodic.period()));
      auto seq = [&](const char* key, const std::vector<Mat>& v) {
        std::string s = "[\n";
        for (size_t i = 0; i < v.size(); ++i) s += pad(4) + matrix(v[i], 4, false) + (i + 1 < v.size() ? ",\n" : "\n");
        f.emplace_back(key, s + pad(2) + "]");
      };
      seq("A", doc.periodic.A);
      seq("B", doc.periodic.B);
      seq("C", doc.periodic.C);
      seq("D", doc.periodic.D);
      break;
    }
  }
  if (doc.tol) f.emplace_back("tol", num(*doc.tol));
  if (doc.windowN) f.emplace_back("window_N", std::to_string(*doc.windowN));
  if (doc.epsilon) f.emplace_back("epsilon", num(*doc.epsilon));
  return object(f, 0) + "\n";
}

std::string certificate_json(const KypCertificate& c) { return certificate_body(c, 0) + "\n"; }

std::string report_json(const CertificationReport& r) { return report_body(r, 0) + "\n"; }

std::string tv_certificate_json(const TvCertificate& c) {
  std::string hs = "[\n";
  for (size_t k = 0; k < c.H.size(); ++k) hs += pad(6) + matrix(c.H[k], 6, true) + (k + 1 < c.H.size() ? ",\n" : "\n");
  hs += pad(4) + "]";
  std::string rs = "[";
  for (size_t k = 0; k < c.residualSpectra.size(); ++k) rs += (k ? ", " : "") + vector(c.residualSpectra[k]);
  rs += "]";
  std::vector<Field> cert{
      {"H_k", hs},
      {"residual_spectra", rs},
      {"inertia", inertia_json(c.inertia)},
      {"epsilon", num(c.epsilon)},
      {"window_N", std::to_string(c.windowN)},
      {"min_residual", num(c.minResidual)},
      {"max_norm", num(c.maxNorm)},
      {"max_inv_norm", num(c.maxInvNorm)},
  };
  std::vector<Field> f{
      {"verdict", quote(to_string(Verdict::StrictlyContractiveCertified))},
      {"kind", quote("periodic")},
      {"period", std::to_string(c.H.size())},
      {"hinf", num(c.lifted.hinf)},
      {"epsilon", num(c.epsilon)},
      {"certificate", object(cert, 2)},
  };
  return object(f, 0) + "\n";
}

StoredCertificate parse_certificate(const std::string& text, const std::string& source) {
  Context ctx{text, source};
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(source + ": JSON syntax error: " + e.what());
  }
  if (doc.is_object() && doc.contains("certificate")) {
    if (doc["certificate"].is_null()) ctx.fail("certificate", "report carries no certificate");
    doc = doc["certificate"];
  }
  if (!doc.is_object()) ctx.fail("", "expected a certificate object");
  StoredCertificate c;
  RawMatrix H = field_matrix(doc, ctx, "H");
  c.H = H.noRows ? Mat(0, 0) : H.M;
  if (c.H.rows() != c.H.cols()) ctx.fail("H", "must be square");
  if (auto it = doc.find("coordinates_T"); it != doc.end() && !it->is_null()) {
    RawMatrix T = parse_matrix(*it, ctx, "coordinates_T");
    c.T = T.noRows ? Mat(0, 0) : T.M;
    if (c.T.size() && (c.T.rows() != c.H.rows() || c.T.cols() != c.H.cols()))
      ctx.fail("coordinates_T", "must match the size of H");
  }
  if (auto it = doc.find("epsilon"); it != doc.end() && it->is_number()) c.epsilon = it->get<double>();
  if (auto it = doc.find("bicausal"); it != doc.end() && it->is_boolean()) c.bicausal = it->get<bool>();
  return c;
}

}  // namespace kyp::io
