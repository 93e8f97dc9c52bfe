// Command-line front end: characteristic function sweeps, eigenvalues,
// expansions, resolvent solves and the verification suite.

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <nlohmann/json.hpp>
#include <string>

#include "tsl/csv.hpp"
#include "tsl/error.hpp"
#include "tsl/expansion.hpp"
#include "tsl/oracle.hpp"
#include "tsl/problem.hpp"
#include "tsl/resolvent.hpp"
#include "tsl/spectrum.hpp"
#include "tsl/verify.hpp"

#ifndef TSL_VERSION
#define TSL_VERSION "0.0.0"
#endif

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw tsl::Error("SHA-256 digest failed");
  }
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

class Run {
 public:
  Run(std::string command, const std::string& problem_path, const std::string& out_dir)
      : command_(std::move(command)), out_(out_dir), start_(std::chrono::steady_clock::now()) {
    const std::string text = tsl::read_text_file(problem_path);
    spec_ = tsl::load_problem(text);
    tsl::require_valid(spec_);
    sha_ = sha256_hex(text);
    std::error_code ec;
    fs::create_directories(out_, ec);
    if (ec) throw tsl::ConfigError("cannot create output directory '" + out_.string() + "': " + ec.message());
  }

  const tsl::ProblemSpec& spec() const { return spec_; }
  json& params() { return params_; }

  void write(const std::string& name, const std::string& content) const {
    std::ofstream f(out_ / name, std::ios::binary);
    f << content;
    if (!f) throw tsl::ConfigError("cannot write '" + (out_ / name).string() + "'");
  }

  void finish() const {
    const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
    json m = {{"command", command_}, {"problem_sha256", sha_}, {"params", params_}, {"version", TSL_VERSION},
              {"wall_ms", ms}};
    write("manifest.json", m.dump(2) + "\n");
  }

 private:
  std::string command_;
  fs::path out_;
  std::chrono::steady_clock::time_point start_;
  tsl::ProblemSpec spec_;
  std::string sha_;
  json params_ = json::object();
};

struct Common {
  std::string problem;
  std::string out = ".";
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("problem", c.problem, "Problem configuration (JSON)")->required();
  sub->add_option("--out", c.out, "Output directory")->capture_default_str();
}

int cmd_charfn(const Common& c, double lo, double hi, std::size_t samples) {
  Run run("charfn", c.problem, c.out);
  run.params() = {{"min", lo}, {"max", hi}, {"samples", samples}};
  const auto trace = tsl::char_fn_trace(run.spec(), lo, hi, samples);
  run.write("charfn.csv", tsl::csv::charfn(trace));
  run.finish();
  return kExitOk;
}

int cmd_eigs(const Common& c, double lo, double hi, std::size_t max_count) {
  Run run("eigs", c.problem, c.out);
  tsl::EigenSearchOptions opt;
  if (run.spec().sign_class() < 0) {
    std::cout << "note: gamma1*gamma2*delta1*delta2 < 0; the problem is not self-adjoint in the modified "
                 "inner product and its spectrum may be empty\n";
    opt.allow_non_self_adjoint = true;
  }
  const auto search = tsl::find_eigenvalues(run.spec(), lo, hi, max_count, opt);
  for (const auto& w : search.warnings) std::cerr << "warning: " << w << "\n";
  if (search.eigenpairs.empty()) std::cout << "no eigenvalues in [" << lo << ", " << hi << "]\n";
  run.params() = {{"min", lo}, {"max", hi}, {"max_count", max_count}, {"found", search.eigenpairs.size()}};
  run.write("eigenvalues.csv", tsl::csv::eigenvalues(search.eigenpairs));
  run.finish();
  return kExitOk;
}

int cmd_expand(const Common& c, const std::string& f_left, const std::string& f_right,
               const std::optional<double>& f2_opt, std::size_t terms) {
  if (terms == 0) throw tsl::ConfigError("--terms must be at least 1");
  Run run("expand", c.problem, c.out);
  const auto& spec = run.spec();
  if (spec.sign_class() <= 0) throw tsl::ConfigError("expansion requires gamma1*gamma2*delta1*delta2 > 0");
  const tsl::PiecewiseExpression f{tsl::parse_expression(f_left), tsl::parse_expression(f_right)};
  const auto dom = tsl::check_domain(spec, f);
  if (!dom.member) {
    std::cerr << "warning: f does not satisfy the domain conditions, so the uniform expansion hypothesis is not "
                 "met; computing anyway\n";
  }
  const double f2 = f2_opt.value_or(dom.f2);

  const auto search = tsl::lowest_eigenpairs(spec, terms);
  if (search.eigenpairs.size() < terms) {
    std::cerr << "warning: only " << search.eigenpairs.size() << " eigenpairs found\n";
  }
  const auto F = tsl::H1Element<double>::from_expressions(f, f2);
  const auto r = tsl::expand(spec, F, search.eigenpairs, tsl::expansion_grid(spec));
  run.params() = {{"f_left", f_left},           {"f_right", f_right},   {"f2", f2},
                  {"terms", terms},             {"member", dom.member}, {"max_error", r.max_error},
                  {"parseval_defect", r.parseval_defect}};
  run.write("expansion.csv", tsl::csv::expansion(r));
  run.write("coefficients.csv", tsl::csv::coefficients(search.eigenpairs, r.coefficients));
  run.finish();
  std::cout << "max_error " << tsl::csv::number(r.max_error) << "\n";
  return kExitOk;
}

int cmd_resolve(const Common& c, double re, double im, const std::string& f1_left, const std::string& f1_right,
                double f2) {
  Run run("resolve", c.problem, c.out);
  const auto& spec = run.spec();
  const tsl::PiecewiseExpression f{tsl::parse_expression(f1_left), tsl::parse_expression(f1_right)};
  const auto F = tsl::to_complex(tsl::H1Element<double>::from_expressions(f, f2));
  const tsl::complex lambda(re, im);
  const auto grid = tsl::SampleGrid::uniform(spec);
  const tsl::GreenKernel<tsl::complex> kernel(spec, lambda, grid);
  tsl::ResolventResult<tsl::complex> u;
  u.u = tsl::solve_nonhomogeneous(kernel, F, grid);
  u.beta_prime = tsl::boundary_forms(spec, u.u).beta_prime;

  const double norm_f = tsl::norm(spec, F);
  const double norm_u = tsl::norm(spec, u.element());
  run.params() = {{"lambda_re", re},
                  {"lambda_im", im},
                  {"f1_left", f1_left},
                  {"f1_right", f1_right},
                  {"f2", f2},
                  {"norm_U", norm_u},
                  {"norm_F", norm_f},
                  {"norm_ratio", norm_f > 0.0 ? norm_u / norm_f : 0.0}};

  const auto coarse = tsl::SampleGrid::uniform(spec, 11);
  std::vector<double> xs;
  for (tsl::Side s : {tsl::Side::left, tsl::Side::right}) {
    for (double x : coarse.on(s)) {
      if (x != spec.c) xs.push_back(x);
    }
  }
  run.write("solution.csv", tsl::csv::solution(u.u));
  run.write("green.csv", tsl::csv::green(kernel, xs, xs));
  run.finish();
  return kExitOk;
}

int cmd_verify(const Common& c, std::size_t max_count) {
  Run run("verify", c.problem, c.out);
  tsl::VerifyOptions opt;
  opt.max_count = max_count;
  const auto rep = tsl::run_verification(run.spec(), opt);
  for (const auto& chk : rep.checks) {
    std::cout << tsl::to_string(chk.status) << ' ' << chk.name << " metric=" << tsl::csv::number(chk.metric)
              << " tol=" << tsl::csv::number(chk.tolerance);
    if (!chk.detail.empty()) std::cout << " (" << chk.detail << ")";
    std::cout << '\n';
  }
  for (const auto& [name, text] : rep.artifacts) run.write(name, text);
  run.params() = {{"max_count", max_count},
                  {"lambda_min", rep.lambda_min},
                  {"lambda_max", rep.lambda_max},
                  {"eigenvalues", rep.eigen_count},
                  {"passed", rep.passed()}};
  run.finish();
  return rep.passed() ? kExitOk : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transmission Sturm-Liouville toolkit"};
  app.set_version_flag("--version", TSL_VERSION);
  app.require_subcommand(1);

  Common common;
  double lo = -1.0, hi = 100.0;
  std::size_t samples = 500, max_count = 10, terms = 40, verify_count = 20;
  std::string f_left, f_right, f1_left = "0", f1_right = "0";
  std::optional<double> f2_expand;
  double f2 = 0.0, lambda_re = 0.0, lambda_im = 0.0;

  auto* charfn = app.add_subcommand("charfn", "Sample the characteristic function w(lambda)");
  add_common(charfn, common);
  charfn->add_option("--min", lo, "Lower end of the lambda range")->capture_default_str();
  charfn->add_option("--max", hi, "Upper end of the lambda range")->capture_default_str();
  charfn->add_option("--samples", samples, "Number of samples")->capture_default_str();

  auto* eigs = app.add_subcommand("eigs", "Eigenvalues and normalization constants in a range");
  add_common(eigs, common);
  eigs->add_option("--min", lo, "Lower end of the lambda range")->capture_default_str();
  eigs->add_option("--max", hi, "Upper end of the lambda range")->capture_default_str();
  eigs->add_option("--max-count", max_count, "Keep at most this many eigenvalues")->capture_default_str();

  auto* expand = app.add_subcommand("expand", "Eigenfunction expansion of a piecewise function");
  add_common(expand, common);
  expand->add_option("--f-left", f_left, "f on [a, c)")->required();
  expand->add_option("--f-right", f_right, "f on (c, b]")->required();
  expand->add_option("--f2", f2_expand, "Scalar component (default: the boundary form of f)");
  expand->add_option("--terms", terms, "Number of terms")->capture_default_str();

  auto* resolve = app.add_subcommand("resolve", "Apply the resolvent at complex lambda");
  add_common(resolve, common);
  resolve->add_option("--lambda-re", lambda_re, "Real part of lambda")->required();
  resolve->add_option("--lambda-im", lambda_im, "Imaginary part of lambda")->capture_default_str();
  resolve->add_option("--f1-left", f1_left, "F1 on [a, c)")->capture_default_str();
  resolve->add_option("--f1-right", f1_right, "F1 on (c, b]")->capture_default_str();
  resolve->add_option("--f2", f2, "Scalar component F2")->capture_default_str();

  auto* verify = app.add_subcommand("verify", "Run the invariant suite");
  add_common(verify, common);
  verify->add_option("--max-count", verify_count, "Number of eigenpairs to check")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*charfn) return cmd_charfn(common, lo, hi, samples);
    if (*eigs) return cmd_eigs(common, lo, hi, max_count);
    if (*expand) return cmd_expand(common, f_left, f_right, f2_expand, terms);
    if (*resolve) return cmd_resolve(common, lambda_re, lambda_im, f1_left, f1_right, f2);
    if (*verify) return cmd_verify(common, verify_count);
  } catch (const tsl::ResolventPole& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const tsl::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const tsl::NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitConfig;
}
