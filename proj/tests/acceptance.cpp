// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "support.hpp"
#include "tsl/expansion.hpp"
#include "tsl/oracle.hpp"
#include "tsl/resolvent.hpp"
#include "tsl/shooting.hpp"
#include "tsl/spectrum.hpp"

using namespace tsl;
using tsl::testing::load;
using tsl::testing::rel;

namespace {

struct Outcome {
  bool pass = false;
  std::string measured;
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

PiecewiseExpression pw(const char* left, const char* right) { return {parse_expression(left), parse_expression(right)}; }

const std::vector<Eigenpair>& eigenpairs(const std::string& name, std::size_t count) {
  static std::vector<std::pair<std::string, std::vector<Eigenpair>>> cache;
  const std::string key = name + "/" + std::to_string(count);
  for (const auto& [k, v] : cache) {
    if (k == key) return v;
  }
  cache.emplace_back(key, lowest_eigenpairs(load(name), count).eigenpairs);
  return cache.back().second;
}

// 1. Empty spectrum when gamma1 gamma2 delta1 delta2 < 0.
Outcome counterexample() {
  const auto spec = load("p_cex");
  const auto trace = char_fn_trace(spec, -50.0, 200.0, 500);
  double worst = 0.0;
  for (double w : trace.w) worst = std::max(worst, std::abs(w - 1.0));
  EigenSearchOptions opt;
  opt.allow_non_self_adjoint = true;
  const auto found = find_eigenvalues(spec, -50.0, 200.0, 100, opt).eigenpairs.size();
  return {worst <= 1e-7 && found == 0, "max|w-1| = " + sci(worst) + ", eigenvalues found = " + std::to_string(found)};
}

double worst_against(const ProblemSpec& spec, const std::vector<double>& expect) {
  const auto got = find_eigenvalues(spec, -1.0, expect.back() + 10.0, expect.size()).eigenpairs;
  if (got.size() != expect.size()) return INFINITY;
  double worst = 0.0;
  for (std::size_t k = 0; k < expect.size(); ++k) worst = std::max(worst, rel(got[k].lambda, expect[k]));
  return worst;
}

// 2. tan s = 1/s roots by scalar bisection.
Outcome continuous_limit() {
  const double worst = worst_against(load("p_cont"), tsl::testing::cont_eigenvalues(3));
  return {worst <= 1e-8, "max rel = " + sci(worst)};
}

// 3. Hand-derived characteristic function of the transmission problem.
Outcome closed_form() {
  const double worst = worst_against(load("p_trans"), tsl::testing::trans_eigenvalues(3));
  return {worst <= 1e-6, "max rel = " + sci(worst)};
}

// 4. Richardson-extrapolated finite differences.
Outcome finite_difference() {
  double worst = 0.0;
  for (const char* name : {"p_cont", "p_trans"}) {
    const auto spec = load(name);
    const auto rich = richardson_eigenvalues(spec, 64, 3).extrapolated;
    const auto shot = find_eigenvalues(spec, -1.0, 1.5 * rich.back() + 10.0, 3).eigenpairs;
    if (shot.size() != 3) return {false, std::string(name) + ": shooting found " + std::to_string(shot.size())};
    for (std::size_t k = 0; k < 3; ++k) worst = std::max(worst, rel(rich[k], shot[k].lambda));
  }
  return {worst <= 1e-5, "max rel = " + sci(worst)};
}

// 5. gamma1 gamma2 W(phi, chi) on [a, c) and delta1 delta2 W(phi, chi) on (c, b]
// are one constant: compared at random points of each side, from full
// integrations of both solutions.
Outcome wronskian_identity() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  for (const char* name : {"p_cont", "p_trans", "p_cex"}) {
    const auto spec = load(name);
    const auto ends = SampleGrid::endpoints(spec);
    for (int i = 0; i < 50; ++i) {
      const double lam = -10.0 + 410.0 * unit(rng);
      const auto phi = solve_phi<double>(spec, lam, ends);
      const auto chi = solve_chi<double>(spec, lam, ends);
      const double xl = spec.a + (spec.c - spec.a) * unit(rng);
      const double xr = spec.c + (spec.b - spec.c) * unit(rng);
      const auto pl = phi.solution.at(Side::left, xl), ql = chi.solution.at(Side::left, xl);
      const auto pr = phi.solution.at(Side::right, xr), qr = chi.solution.at(Side::right, xr);
      const double w1 = spec.gamma_product() * wronskian(pl, ql);
      const double w2 = spec.delta_product() * wronskian(pr, qr);
      const double scale = std::max(std::abs(spec.gamma_product()) * wronskian_scale(pl, ql),
                                    std::abs(spec.delta_product()) * wronskian_scale(pr, qr));
      worst = std::max(worst, std::abs(w1 - w2) / scale);
    }
  }
  return {worst <= 1e-7, "max rel = " + sci(worst) + " over 150 lambda"};
}

// 6. Quadrature norm against w'/k_n, and (phi_n)'_beta against rho / k_n.
Outcome norm_identity() {
  double norm = 0.0, boundary = 0.0;
  std::size_t n = 0;
  for (const char* name : {"p_cont", "p_trans"}) {
    const auto spec = load(name);
    for (const auto& e : eigenpairs(name, 20)) {
      norm = std::max(norm, rel(e.norm_sq_quadrature, e.omega_prime / e.k));
      boundary = std::max(boundary, rel(e.phi_beta_prime, spec.rho() / e.k));
      ++n;
    }
  }
  return {n == 40 && norm <= 1e-5 && boundary <= 1e-6,
          std::to_string(n) + " eigenpairs, norm rel = " + sci(norm) + ", boundary rel = " + sci(boundary)};
}

// 7. Pairwise orthogonality in the modified inner product.
Outcome orthogonality() {
  double worst = 0.0;
  for (const char* name : {"p_cont", "p_trans"}) {
    const auto spec = load(name);
    const auto& eigs = eigenpairs(name, 20);
    for (std::size_t i = 0; i < eigs.size(); ++i) {
      for (std::size_t j = i + 1; j < eigs.size(); ++j) {
        worst = std::max(worst, std::abs(inner_product(spec, eigs[i].element(), eigs[j].element())));
      }
    }
  }
  return {worst <= 1e-7, "max |<Psi_n, Psi_m>| = " + sci(worst)};
}

// 8. ||U|| <= ||F|| / |Im lambda| for random lambda and data.
Outcome resolvent_bound() {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> sym(-1.0, 1.0);
  double worst = 0.0;
  for (const char* name : {"p_cont", "p_trans"}) {
    const auto spec = load(name);
    const auto grid = SampleGrid::uniform(spec);
    for (int i = 0; i < 20; ++i) {
      const double im = (sym(rng) < 0 ? -1.0 : 1.0) * (0.1 + 9.9 * std::abs(sym(rng)));
      const complex lam(-10.0 + 210.0 * std::abs(sym(rng)), im);
      const GreenKernel<complex> kernel(spec, lam, grid);
      for (int j = 0; j < 5; ++j) {
        const complex p(sym(rng), sym(rng)), q(sym(rng), sym(rng)), r(sym(rng), sym(rng));
        const double freq = 1.0 + 6.0 * std::abs(sym(rng));
        const H1Element<complex> F{[=](Side s, double x) {
                                     return s == Side::left ? p + q * x : r * std::cos(freq * x) + p * x * x;
                                   },
                                   complex(sym(rng), sym(rng))};
        ResolventResult<complex> U;
        U.u = solve_nonhomogeneous(kernel, F, grid);
        U.beta_prime = boundary_forms(spec, U.u).beta_prime;
        worst = std::max(worst, norm(spec, U.element()) * std::abs(im) / norm(spec, F));
      }
    }
  }
  return {worst <= 1.0 + 1e-6, "max |Im lambda| ||U|| / ||F|| = " + sci(worst)};
}

// 9. R(lambda) (lambda - A) F = F for members of the operator domain.
Outcome round_trip() {
  struct Member {
    ProblemSpec spec;
    PiecewiseExpression f, f_second;
  };
  auto with_potential = load("p_cont");
  with_potential.q_left = parse_expression("1 + x");
  with_potential.q_right = parse_expression("cos(x)");
  const std::vector<Member> members = {
      {load("p_trans"), pw("x + 1", "2 + x/2"), pw("0", "0")},
      {load("p_trans"), pw("sin(x + 1)", "2*sin(1) + cos(1)/2*x + x^2"), pw("-sin(x + 1)", "2")},
      {with_potential, pw("sin(2*x)", "sin(2*x)"), pw("-4*sin(2*x)", "-4*sin(2*x)")},
  };
  const complex lambda(2.0, 1.0);
  double worst = 0.0;
  for (const auto& m : members) {
    const auto& spec = m.spec;
    const auto dom = check_domain(spec, m.f);
    if (!dom.member) return {false, "hand-built function is not in the domain"};
    const double fb = m.f.right(spec.b);
    const double h = 1e-5;
    const double dfb = (m.f.right(spec.b + h) - m.f.right(spec.b - h)) / (2 * h);
    const auto forms = boundary_forms(spec, StatePair<double>{fb, dfb});
    const H1Element<complex> G{[&](Side s, double x) {
                                 return lambda * m.f(s, x) + m.f_second(s, x) - spec.q(s, x) * m.f(s, x);
                               },
                               lambda * forms.beta_prime + forms.beta};
    const auto U = apply_resolvent(spec, lambda, G, SampleGrid::uniform(spec));
    worst = std::max(worst, std::abs(U.beta_prime - forms.beta_prime));
    for (Side s : {Side::left, Side::right}) {
      for (double x : uniform_grid(spec, s, 301)) worst = std::max(worst, std::abs(U.u.at(s, x).u - m.f(s, x)));
    }
  }
  return {worst <= 1e-5, "max error = " + sci(worst)};
}

// 10. Residue of the resolvent and convergence of the expansion.
Outcome residue_and_expansion() {
  const auto spec = load("p_trans");
  const auto& eigs = eigenpairs("p_trans", 40);
  const auto grid = SampleGrid::uniform(spec);
  const auto F = H1Element<double>::from_expressions(pw("1 + x", "exp(x)"), 0.5);
  const double d = 1e-4;
  double residue = 0.0;
  for (std::size_t n = 0; n < 3; ++n) {
    const auto& e = eigs[n];
    const double cn = fourier_coefficient(spec, F, e);
    const auto U = apply_resolvent(spec, e.lambda + d, F, grid);
    residue = std::max(residue, std::abs(d * U.beta_prime - cn * e.psi_beta_prime));
    for (Side s : {Side::left, Side::right}) {
      for (double x : grid.on(s)) residue = std::max(residue, std::abs(d * U.u.at(s, x).u - cn * e.psi.at(s, x).u));
    }
  }

  const auto f = pw("x + 1", "2 + x/2");
  const auto member = H1Element<double>::from_expressions(f, check_domain(spec, f).f2);
  const auto egrid = expansion_grid(spec);
  const auto r10 = expand(spec, member, std::span(eigs).first(10), egrid);
  const auto r40 = expand(spec, member, std::span(eigs).first(40), egrid);

  const auto cont = load("p_cont");
  const auto g = pw("x", "x");
  const auto cont_member = H1Element<double>::from_expressions(g, check_domain(cont, g).f2);
  const double cont_defect = expand(cont, cont_member, eigenpairs("p_cont", 40), expansion_grid(cont)).parseval_defect;
  const double defect = std::max(r40.parseval_defect, cont_defect);

  const bool pass = eigs.size() == 40 && residue <= 1e-3 && r40.max_error < r10.max_error && defect <= 1e-3;
  return {pass, "residue error = " + sci(residue) + ", max_error N=10/40 = " + sci(r10.max_error) + "/" +
                    sci(r40.max_error) + ", energy defect N=40 = " + sci(defect)};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 11. Two verify runs write byte-identical CSV files.
Outcome determinism() {
  namespace fs = std::filesystem;
  const auto base = fs::temp_directory_path() / ("tsl_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(base);
  std::vector<fs::path> dirs = {base / "run1", base / "run2"};
  for (const auto& dir : dirs) {
    const std::string cmd = std::string(TSL_CLI_PATH) + " verify " + tsl::testing::problem_path("p_cont") + " --out " +
                            dir.string() + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) return {false, "verify exited with status " + std::to_string(status)};
  }
  std::set<std::string> names;
  for (const auto& dir : dirs) {
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.path().extension() == ".csv") names.insert(entry.path().filename().string());
    }
  }
  std::size_t differing = 0;
  for (const auto& name : names) {
    if (!fs::exists(dirs[0] / name) || !fs::exists(dirs[1] / name) || slurp(dirs[0] / name) != slurp(dirs[1] / name)) {
      ++differing;
    }
  }
  fs::remove_all(base);
  return {!names.empty() && differing == 0,
          std::to_string(names.size()) + " CSV files, " + std::to_string(differing) + " differing"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"counterexample has w = 1 and no eigenvalues", counterexample},
      {"continuous-limit eigenvalues match tan s = 1/s", continuous_limit},
      {"transmission eigenvalues match the closed form", closed_form},
      {"finite-difference oracle agrees with shooting", finite_difference},
      {"weighted Wronskian is the same on both sides", wronskian_identity},
      {"norm and boundary identities", norm_identity},
      {"eigenfunctions are orthogonal", orthogonality},
      {"resolvent norm bound", resolvent_bound},
      {"resolvent round trip on domain members", round_trip},
      {"residue and expansion consistency", residue_and_expansion},
      {"verify artifacts are reproducible", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s %zu: %s (%s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.measured.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
