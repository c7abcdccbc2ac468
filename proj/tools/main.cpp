#include "document.hpp"

#include "kyp/frequency.hpp"
#include "kyp/linalg.hpp"
#include "kyp/trajectory.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace kyp;
namespace fs = std::filesystem;

constexpr int kExitCertified = 0;
constexpr int kExitNotContractive = 2;
constexpr int kExitInconclusive = 3;
constexpr int kExitInputError = 4;

struct Settings {
  double tol = 0.0;  // 0: document value or default_tol()
  int windowN = 0;   // 0: document value or default window
  bool strict = false;
  bool bicausalNative = false;
};

CertifyOptions options_for(const io::SystemDocument& doc, const Settings& s) {
  CertifyOptions o;
  o.tol = s.tol > 0 ? s.tol : doc.tol.value_or(default_tol());
  o.N = s.windowN > 0 ? s.windowN : doc.windowN.value_or(0);
  o.epsilon = doc.epsilon.value_or(0.0);
  return o;
}

std::string yesno(bool b) { return b ? "yes" : "no"; }

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", x);
  return buf;
}

void print_minimality(std::ostream& out, const MinimalityReport& r, int N) {
  out << "window_N: " << N << "\n";
  out << "minimality: controllable_plus=" << yesno(r.controllablePlus)
      << " controllable_minus=" << yesno(r.controllableMinus) << " observable_plus=" << yesno(r.observablePlus)
      << " observable_minus=" << yesno(r.observableMinus) << "\n";
  out << "surjectivity_margins: " << fmt(r.margins.cPlus) << " " << fmt(r.margins.cMinus) << " "
      << fmt(r.margins.oPlus) << " " << fmt(r.margins.oMinus) << "\n";
}

void analyze_dichotomous(std::ostream& out, const StateSpaceSystem& sys, const CertifyOptions& o) {
  out << "dimensions: n=" << sys.n() << " m=" << sys.m() << " p=" << sys.p() << "\n";
  out << "dichotomy_margin: " << fmt(spectral_margin(sys.A)) << "\n";
  DichotomousDecomposition dec;
  try {
    dec = dichotomy_split(sys, o.tol);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoDichotomy && e.code() != ErrorCode::SylvesterFailure) throw;
    out << "diagnostic: " << to_string(e.code()) << "\n";
    return;
  }
  out << "split: dim_minus=" << dec.dimMinus << " dim_plus=" << dec.dimPlus << "\n";
  out << "hinf: " << fmt(hinf_norm(dec, o.tol)) << "\n";
  const int N = o.N > 0 ? o.N : make_window(dec, 0).N;
  print_minimality(out, check_exact_minimality(build_gramians(dec, N), o.tol), N);
}

void analyze_document(std::ostream& out, const io::SystemDocument& doc, const CertifyOptions& o) {
  out << "kind: " << io::to_string(doc.kind) << "\n";
  switch (doc.kind) {
    case io::DocumentKind::Dichotomous:
      analyze_dichotomous(out, doc.sys, o);
      break;
    case io::DocumentKind::Bicausal: {
      const BicausalRealization& bi = doc.bi;
      out << "dimensions: dim_minus=" << bi.dimMinus() << " dim_plus=" << bi.dimPlus() << " m=" << bi.m()
          << " p=" << bi.p() << "\n";
      out << "spectral_radius_plus: " << fmt(bi.dimPlus() ? linalg::spectral_radius(bi.Aplus) : 0.0) << "\n";
      out << "spectral_radius_minus: " << fmt(bi.dimMinus() ? linalg::spectral_radius(bi.Aminus) : 0.0) << "\n";
      out << "hinf: " << fmt(hinf_norm(bi, o.tol)) << "\n";
      const int N = o.N > 0 ? o.N : make_window(bi, 0).N;
      print_minimality(out, check_exact_minimality(build_gramians(bi, N), o.tol), N);
      try {
        StateSpaceSystem sys = from_bicausal(bi, o.tol);
        out << "equivalent_dichotomous: yes\n";
        analyze_dichotomous(out, sys, o);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::SingularAminus) throw;
        out << "equivalent_dichotomous: no (" << to_string(e.code()) << ")\n";
      }
      break;
    }
    case io::DocumentKind::Periodic: {
      const PeriodicSystem& ps = doc.periodic;
      TvDichotomyReport d = tv_dichotomy(ps, o.tol);
      out << "period: " << ps.period() << "\n";
      out << "dimensions: n=" << ps.n() << " m=" << ps.m() << " p=" << ps.p() << "\n";
      out << "monodromy_margin: " << fmt(d.margin) << "\n";
      if (!d.dichotomous) {
        out << "diagnostic: NoDichotomy\n";
        break;
      }
      out << "split: dim_minus=" << d.dimMinus << " dim_plus=" << d.dimPlus << "\n";
      out << "lifted_hinf: " << fmt(hinf_norm(lift_stationary(ps, o.tol).sys, o.tol)) << "\n";
      break;
    }
  }
}

int exit_code(Verdict v) {
  switch (v) {
    case Verdict::ContractiveCertified:
    case Verdict::StrictlyContractiveCertified: return kExitCertified;
    case Verdict::NotContractive: return kExitNotContractive;
    case Verdict::Inconclusive: return kExitInconclusive;
  }
  return kExitInconclusive;
}

struct CertifyOutcome {
  int code = kExitInconclusive;
  std::string summary;  // human-readable lines
  std::string json;
};

CertificationReport certify_dichotomous(const StateSpaceSystem& sys, const Settings& s, const CertifyOptions& o) {
  return s.strict ? certify_strict(sys, o) : certify_standard(sys, o);
}

CertifyOutcome certify_document(const io::SystemDocument& doc, const Settings& s) {
  const CertifyOptions o = options_for(doc, s);
  CertifyOutcome out;
  std::ostringstream text;
  if (doc.kind == io::DocumentKind::Periodic) {
    try {
      TvCertificate c = solve_tv_kyp(doc.periodic, o);
      out.code = kExitCertified;
      out.json = io::tv_certificate_json(c);
      text << "verdict: STRICTLY_CONTRACTIVE_CERTIFIED\n"
           << "period: " << c.H.size() << "\n"
           << "epsilon: " << fmt(c.epsilon) << "\n"
           << "min_residual: " << fmt(c.minResidual) << "\n"
           << "inertia: " << c.inertia.nPlus << " " << c.inertia.nMinus << " " << c.inertia.nZero << "\n";
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoDichotomy && e.code() != ErrorCode::NotStrictlyContractive) throw;
      CertificationReport r;
      r.verdict = Verdict::Inconclusive;
      r.diagnostics.route = "periodic";
      r.diagnostics.message = e.what();
      if (e.code() == ErrorCode::NotStrictlyContractive) {
        r.hinf = hinf_norm(lift_stationary(doc.periodic, o.tol).sys, o.tol);
        if (r.hinf > 1.0 + o.tol) r.verdict = Verdict::NotContractive;
      }
      out.code = exit_code(r.verdict);
      out.json = io::report_json(r);
      text << "verdict: " << to_string(r.verdict) << "\n" << "message: " << r.diagnostics.message << "\n";
    }
    out.summary = text.str();
    return out;
  }

  CertificationReport r;
  if (doc.kind == io::DocumentKind::Dichotomous) {
    r = certify_dichotomous(doc.sys, s, o);
  } else if (s.bicausalNative) {
    r = certify_bicausal(doc.bi, s.strict, o);
  } else {
    try {
      r = certify_dichotomous(from_bicausal(doc.bi, o.tol), s, o);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SingularAminus) throw;
      r = certify_bicausal(doc.bi, s.strict, o);
    }
  }
  out.code = exit_code(r.verdict);
  out.json = io::report_json(r);
  text << "verdict: " << to_string(r.verdict) << "\n" << "hinf: " << fmt(r.hinf) << "\n";
  if (r.certificate) {
    const KypCertificate& c = *r.certificate;
    text << "storage: " << c.storage << " (" << c.method << ")\n"
         << "epsilon: " << fmt(c.epsilon) << "\n"
         << "window_N: " << c.windowN << "\n"
         << "min_residual: " << fmt(c.min_residual()) << "\n"
         << "inertia: " << c.inertia.nPlus << " " << c.inertia.nMinus << " " << c.inertia.nZero << "\n";
  }
  if (!r.diagnostics.message.empty()) text << "message: " << r.diagnostics.message << "\n";
  out.summary = text.str();
  return out;
}

void write_text(const std::string& path, const std::string& content) {
  if (path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw io::InputError(path + ": cannot write file");
  f << content;
}

int run_certify(const std::string& path, const std::string& jsonOut, const Settings& s) {
  io::SystemDocument doc = io::read_document(path);
  CertifyOutcome out = certify_document(doc, s);
  std::cout << out.summary;
  if (!jsonOut.empty()) write_text(jsonOut, out.json);
  return out.code;
}

// Documents are certified as independent jobs; output follows file-name order.
// Exit code is the most severe per-document code (4 > 3 > 2 > 0).
int run_batch(const std::string& dir, const std::string& jsonDir, const Settings& s) {
  if (!fs::is_directory(dir)) throw io::InputError(dir + ": not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (!jsonDir.empty()) fs::create_directories(jsonDir);

  struct Job {
    int code;
    std::string line, json;
  };
  std::vector<std::future<Job>> jobs;
  for (const fs::path& f : files)
    jobs.push_back(std::async(std::launch::async, [f, s] {
      try {
        io::SystemDocument doc = io::read_document(f.string());
        CertifyOutcome out = certify_document(doc, s);
        std::string verdict = out.summary.substr(0, out.summary.find('\n'));
        return Job{out.code, verdict.substr(verdict.find(' ') + 1), out.json};
      } catch (const std::exception& e) {
        return Job{kExitInputError, std::string("INPUT_ERROR ") + e.what(), ""};
      }
    }));
  auto severity = [](int c) { return c == kExitInputError ? 3 : c == kExitInconclusive ? 2 : c == kExitNotContractive ? 1 : 0; };
  int worst = kExitCertified;
  for (size_t i = 0; i < files.size(); ++i) {
    Job j = jobs[i].get();
    std::cout << files[i].filename().string() << "\t" << j.code << "\t" << j.line << "\n";
    if (!jsonDir.empty() && !j.json.empty())
      write_text((fs::path(jsonDir) / (files[i].stem().string() + ".report.json")).string(), j.json);
    if (severity(j.code) > severity(worst)) worst = j.code;
  }
  return worst;
}

Mat simulation_storage(const io::StoredCertificate& c, const io::SystemDocument& doc, const Mat& simT,
                       Eigen::Index dimMinus) {
  Mat H = c.H;
  if (c.T.size()) {
    Mat Ti = c.T.partialPivLu().inverse();
    H = Ti.adjoint() * H * Ti;
  }
  if (doc.kind == io::DocumentKind::Bicausal) {
    if (c.bicausal) return H;
    // Certificate of from_bicausal, states ordered (x_plus, x_minus).
    const Eigen::Index n = H.rows(), dp = n - dimMinus;
    Mat P = Mat::Zero(n, n);
    P.topRightCorner(dp, dp).setIdentity();
    P.bottomLeftCorner(dimMinus, dimMinus).setIdentity();
    return P.adjoint() * H * P;
  }
  return simT.adjoint() * H * simT;
}

int run_simulate(const std::string& path, const std::string& inputPath, const std::string& checkH,
                 const std::string& outPath, const Settings& s) {
  io::SystemDocument doc = io::read_document(path);
  const CertifyOptions o = options_for(doc, s);
  if (doc.kind == io::DocumentKind::Periodic)
    throw io::InputError(path + ": simulate supports dichotomous and bicausal documents");
  const Eigen::Index m = doc.kind == io::DocumentKind::Dichotomous ? doc.sys.m() : doc.bi.m();
  Signal u;
  try {
    u = read_input_csv(io::read_file(inputPath), m);
  } catch (const Error& e) {
    throw io::InputError(inputPath + ": " + e.what());
  }
  Trajectory t;
  Mat T;
  if (doc.kind == io::DocumentKind::Dichotomous) {
    DichotomousDecomposition dec = dichotomy_split(doc.sys, o.tol);
    t = simulate(dec, u, o.tol);
    T = dec.T;
  } else {
    t = simulate_bicausal(doc.bi, u, o.tol);
  }
  const std::string csv = trajectory_csv(t, T);
  std::ostream& info = outPath.empty() || outPath == "-" ? std::cerr : std::cout;
  write_text(outPath.empty() ? "-" : outPath, csv);
  info << "steps: " << t.u.size() << "\n"
       << "input_energy: " << fmt(t.input_energy()) << "\n"
       << "output_energy: " << fmt(t.output_energy()) << "\n";
  if (!checkH.empty()) {
    io::StoredCertificate c = io::parse_certificate(io::read_file(checkH), checkH);
    if (c.H.rows() != (T.size() ? T.rows() : doc.bi.n()))
      throw io::InputError(checkH + ": certificate size does not match the system");
    Mat H = simulation_storage(c, doc, T, t.dimMinus);
    std::vector<double> r = dissipation_residuals(H, t, c.epsilon, o.tol);
    const double mn = r.empty() ? 0.0 : *std::min_element(r.begin(), r.end());
    info << "min_dissipation_residual: " << fmt(mn) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kypcert: dichotomous, bicausal and periodic bounded real lemma certificates"};
  app.require_subcommand(1);
  Settings s;
  app.add_option("--tol", s.tol, "Numerical tolerance (default: KYP_DEFAULT_TOL or 1e-8)")->check(CLI::PositiveNumber);
  app.add_option("--window", s.windowN, "Truncation half-width N (default: from the tail envelope)")
      ->check(CLI::Range(1, 4096));

  std::string path, jsonOut, batchDir, inputPath, checkH, outPath;
  auto* analyze = app.add_subcommand("analyze", "Print dichotomy, norm and minimality data");
  analyze->add_option("path", path, "System document (JSON)")->required();

  auto* certify = app.add_subcommand("certify", "Certify contractivity and emit a KYP certificate");
  certify->add_option("path", path, "System document (JSON)");
  certify->add_flag("--strict", s.strict, "Strict certificate with epsilon margin");
  certify->add_flag("--bicausal-native", s.bicausalNative, "Certify bicausal documents without conversion");
  certify->add_option("--json", jsonOut, "Write the JSON report here ('-' for stdout); a directory with --batch");
  certify->add_option("--batch", batchDir, "Certify every *.json document in a directory");

  auto* sim = app.add_subcommand("simulate", "Simulate a finitely supported input");
  sim->add_option("path", path, "System document (JSON)")->required();
  sim->add_option("--input", inputPath, "Input CSV with columns n,u_1..u_m")->required();
  sim->add_option("--check-H", checkH, "Certificate or report JSON whose H is checked along the trajectory");
  sim->add_option("--output", outPath, "Trajectory CSV destination (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitInputError;
  }

  try {
    if (analyze->parsed()) {
      io::SystemDocument doc = io::read_document(path);
      analyze_document(std::cout, doc, options_for(doc, s));
      return 0;
    }
    if (certify->parsed()) {
      if (!batchDir.empty()) return run_batch(batchDir, jsonOut, s);
      if (path.empty()) throw io::InputError("certify: a document path or --batch is required");
      return run_certify(path, jsonOut, s);
    }
    if (sim->parsed()) return run_simulate(path, inputPath, checkH, outPath, s);
  } catch (const io::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}
