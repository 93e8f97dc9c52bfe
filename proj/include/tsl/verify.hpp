#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "tsl/csv.hpp"
#include "tsl/error.hpp"
#include "tsl/expansion.hpp"
#include "tsl/oracle.hpp"
#include "tsl/problem.hpp"
#include "tsl/resolvent.hpp"
#include "tsl/shooting.hpp"
#include "tsl/spectrum.hpp"

namespace tsl {

enum class CheckStatus { pass, fail, skipped };

inline const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "PASS";
    case CheckStatus::fail: return "FAIL";
    case CheckStatus::skipped: return "SKIPPED";
  }
  return "?";
}

struct CheckResult {
  std::string name;
  CheckStatus status = CheckStatus::pass;
  double metric = 0.0;     // worst observed value of the checked quantity
  double tolerance = 0.0;
  std::string detail;
};

struct VerifyOptions {
  std::size_t max_count = 20;
  std::uint64_t seed = 0x5eed5eedULL;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  std::vector<std::pair<std::string, std::string>> artifacts;  // file name, CSV text
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  std::size_t eigen_count = 0;

  bool passed() const {
    return std::none_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.status == CheckStatus::fail; });
  }
};

namespace detail {

// Platform-independent uniform draw in [0, 1); std::mt19937_64 output is
// fully specified, unlike the standard distributions.
class Uniform {
 public:
  explicit Uniform(std::uint64_t seed) : rng_(seed) {}
  double operator()() { return static_cast<double>(rng_() >> 11) * 0x1p-53; }
  double operator()(double lo, double hi) { return lo + (hi - lo) * (*this)(); }

 private:
  std::mt19937_64 rng_;
};

inline CheckResult run_check(std::string name, double tolerance, const std::function<void(CheckResult&)>& body) {
  CheckResult r;
  r.name = std::move(name);
  r.tolerance = tolerance;
  try {
    body(r);
    if (r.status == CheckStatus::pass && !(r.metric <= tolerance)) r.status = CheckStatus::fail;
  } catch (const Error& e) {
    r.status = CheckStatus::fail;
    r.detail = e.what();
  }
  return r;
}

// Random smooth complex data: a short cosine series on each side plus a scalar.
inline H1Element<complex> random_element(const ProblemSpec& spec, Uniform& u) {
  std::array<complex, 8> coef;
  for (auto& z : coef) z = complex(u(-1.0, 1.0), u(-1.0, 1.0));
  const complex scalar(u(-1.0, 1.0), u(-1.0, 1.0));
  const double a = spec.a, len = spec.b - spec.a;
  return {[coef, a, len](Side s, double x) {
            const std::size_t off = s == Side::left ? 0 : 4;
            complex v{};
            for (std::size_t k = 0; k < 4; ++k) v += coef[off + k] * std::cos(k * M_PI * (x - a) / len);
            return v;
          },
          scalar};
}

inline std::string checks_csv(const std::vector<CheckResult>& checks) {
  std::string out = "check,status,metric,tolerance\n";
  for (const auto& c : checks) {
    out += c.name + ',' + to_string(c.status) + ',' + csv::number(c.metric) + ',' + csv::number(c.tolerance) + '\n';
  }
  return out;
}

}  // namespace detail

inline constexpr double kWronskianIdentityTol = 1e-7;
inline constexpr double kOrthogonalityTol = 1e-7;
inline constexpr double kBoundaryIdentityTol = 1e-6;
inline constexpr double kGreenSymmetryTol = 1e-7;
inline constexpr double kResolventBoundSlack = 1e-6;
inline constexpr double kOracleAgreementTol = 1e-5;

/// The invariant suite: Wronskian identity, orthogonality, norm identities,
/// Green symmetry, resolvent bound, oracle agreement and Parseval trend.
/// Deterministic for a fixed seed.
inline VerifyReport run_verification(const ProblemSpec& spec, const VerifyOptions& opt = {}) {
  require_valid(spec);
  VerifyReport rep;
  const bool self_adjoint = spec.sign_class() > 0;
  std::tie(rep.lambda_min, rep.lambda_max) = spectrum_window(spec, opt.max_count);
  detail::Uniform uni(opt.seed);

  const auto search = find_eigenvalues(spec, rep.lambda_min, rep.lambda_max, opt.max_count,
                                       wide_search_options(opt.max_count, !self_adjoint));
  const auto& eigs = search.eigenpairs;
  rep.eigen_count = eigs.size();
  rep.artifacts.emplace_back("charfn.csv", csv::charfn(search.trace));
  rep.artifacts.emplace_back("eigenvalues.csv", csv::eigenvalues(eigs));

  rep.checks.push_back(detail::run_check("wronskian_identity", kWronskianIdentityTol, [&](CheckResult& r) {
    // gamma1 gamma2 W(phi, chi) on [a, c) and delta1 delta2 W(phi, chi) on (c, b]
    // from full integrations of both solutions, against w(lambda).
    const auto ends = SampleGrid::endpoints(spec);
    for (int i = 0; i < 50; ++i) {
      const double lam = uni(rep.lambda_min, rep.lambda_max);
      const double w = char_fn<double>(spec, lam);
      const auto phi = solve_phi<double>(spec, lam, ends);
      const auto chi = solve_chi<double>(spec, lam, ends);
      double worst = 0.0, scale = 1e-300;
      for (Side side : {Side::left, Side::right}) {
        const double weight = side == Side::left ? spec.gamma_product() : spec.delta_product();
        for (int j = 0; j < 3; ++j) {
          const double x = uni(spec.lower(side), spec.upper(side));
          const auto p = phi.solution.at(side, x), q = chi.solution.at(side, x);
          worst = std::max(worst, std::abs(weight * wronskian(p, q) - w));
          scale = std::max(scale, std::abs(weight) * wronskian_scale(p, q));
        }
      }
      r.metric = std::max(r.metric, worst / scale);
    }
    r.detail = "50 random lambda, 3 points per side";
  }));

  rep.checks.push_back(detail::run_check("orthogonality", kOrthogonalityTol, [&](CheckResult& r) {
    std::vector<H1Element<double>> el;
    for (const auto& e : eigs) el.push_back(e.element());
    for (std::size_t n = 0; n < el.size(); ++n) {
      for (std::size_t m = n + 1; m < el.size(); ++m) {
        r.metric = std::max(r.metric, std::abs(inner_product(spec, el[n], el[m])));
      }
    }
    r.detail = std::to_string(eigs.size()) + " eigenpairs";
  }));

  rep.checks.push_back(detail::run_check("norm_identity", kNormIdentityTol, [&](CheckResult& r) {
    double boundary = 0.0;
    for (const auto& e : eigs) {
      r.metric = std::max(r.metric, std::abs(e.norm_sq - e.norm_sq_quadrature) / e.norm_sq_quadrature);
      const double expect = spec.rho() / e.k;
      boundary = std::max(boundary, std::abs(e.phi_beta_prime - expect) / std::abs(expect));
    }
    r.detail = "boundary identity max_rel = " + csv::number(boundary);
    if (!(boundary <= kBoundaryIdentityTol)) r.status = CheckStatus::fail;
  }));

  // Below the lowest eigenvalue, so never a pole.
  const double lambda_real = rep.lambda_min - 1.0;
  const auto grid = SampleGrid::uniform(spec);

  rep.checks.push_back(detail::run_check("green_symmetry", kGreenSymmetryTol, [&](CheckResult& r) {
    const GreenKernel<double> kernel(spec, lambda_real, grid);
    auto interior = [&] {
      double x;
      do x = uni(spec.a, spec.b); while (x == spec.c);
      return x;
    };
    for (int i = 0; i < 20; ++i) {
      const double x = interior(), y = interior();
      const double g = kernel(x, y), gt = kernel(y, x);
      r.metric = std::max(r.metric, std::abs(g - gt) / std::max(std::abs(g), 1e-300));
    }
    if (self_adjoint) {
      // <R F, G> = <F, R G> for real lambda.
      for (int i = 0; i < 5; ++i) {
        const auto f = detail::random_element(spec, uni);
        const auto g = detail::random_element(spec, uni);
        const GreenKernel<complex> ck(spec, complex(lambda_real), grid);
        auto resolve = [&](const H1Element<complex>& data) {
          ResolventResult<complex> u;
          u.u = solve_nonhomogeneous(ck, data, grid);
          u.beta_prime = boundary_forms(spec, u.u).beta_prime;
          return u.element();
        };
        const complex lhs = inner_product(spec, resolve(f), g);
        const complex rhs = inner_product(spec, f, resolve(g));
        r.metric = std::max(r.metric, std::abs(lhs - rhs) / std::max(std::abs(lhs), 1e-300));
      }
      r.detail = "kernel at 20 pairs, resolvent at 5 data pairs";
    } else {
      r.detail = "kernel at 20 pairs";
    }
  }));

  if (self_adjoint) {
    rep.checks.push_back(detail::run_check("resolvent_bound", kResolventBoundSlack, [&](CheckResult& r) {
      for (int i = 0; i < 20; ++i) {
        const double im = (uni() < 0.5 ? -1.0 : 1.0) * uni(0.5, 5.0);
        const complex lam(uni(rep.lambda_min, rep.lambda_max), im);
        const GreenKernel<complex> kernel(spec, lam, grid);
        for (int j = 0; j < 5; ++j) {
          const auto F = detail::random_element(spec, uni);
          ResolventResult<complex> u;
          u.u = solve_nonhomogeneous(kernel, F, grid);
          u.beta_prime = boundary_forms(spec, u.u).beta_prime;
          const double ratio = norm(spec, u.element()) * std::abs(im) / norm(spec, F);
          r.metric = std::max(r.metric, ratio - 1.0);
        }
      }
      r.metric = std::max(r.metric, 0.0);
      r.detail = "excess of |Im lambda| ||U|| / ||F|| over 1, 20 lambda x 5 data";
    }));
  } else {
    rep.checks.push_back({"resolvent_bound", CheckStatus::skipped, 0.0, kResolventBoundSlack,
                          "requires gamma1*gamma2*delta1*delta2 > 0"});
  }

  if (self_adjoint && !eigs.empty()) {
    rep.checks.push_back(detail::run_check("oracle_agreement", kOracleAgreementTol, [&](CheckResult& r) {
      const std::size_t m = std::min<std::size_t>(3, eigs.size());
      const auto rich = richardson_eigenvalues(spec, 64, m);
      rep.artifacts.emplace_back("oracle.csv", csv::oracle(rich.extrapolated));
      for (std::size_t k = 0; k < m; ++k) {
        r.metric = std::max(r.metric, std::abs(rich.extrapolated[k] - eigs[k].lambda) / std::abs(eigs[k].lambda));
      }
      r.detail = "first " + std::to_string(m) + " eigenvalues, meshes 64/128/256";
    }));
  } else {
    rep.checks.push_back({"oracle_agreement", CheckStatus::skipped, 0.0, kOracleAgreementTol,
                          self_adjoint ? "no eigenvalues found" : "sign_class < 0"});
  }

  rep.checks.push_back(detail::run_check("parseval_trend", 1e-12, [&](CheckResult& r) {
    if (eigs.size() < 2) {
      r.detail = "fewer than two eigenpairs, nothing to compare";
      return;
    }
    // phi at a regular point, with its boundary form, is a member of D(A).
    const auto phi = solve_phi<double>(spec, lambda_real, grid);
    const auto F = H1Element<double>::from_trajectory(phi.solution, boundary_forms(spec, phi.solution).beta_prime);
    const double total = inner_product(spec, F, F);
    std::vector<double> defects;
    double sum = 0.0;
    std::size_t next = 5;
    for (std::size_t n = 0; n < eigs.size(); ++n) {
      const double cn = fourier_coefficient(spec, F, eigs[n]);
      sum += cn * cn;
      if (n + 1 == next || n + 1 == eigs.size()) {
        defects.push_back(std::abs(total - sum) / total);
        next *= 2;
      }
    }
    for (std::size_t i = 1; i < defects.size(); ++i) {
      r.metric = std::max(r.metric, defects[i] - defects[i - 1]);
    }
    r.metric = std::max(r.metric, 0.0);
    r.detail = "energy defect at N = 5, 10, 20, ...: ";
    for (std::size_t i = 0; i < defects.size(); ++i) r.detail += (i ? " " : "") + csv::number(defects[i]);
  }));

  rep.artifacts.emplace_back("checks.csv", detail::checks_csv(rep.checks));
  return rep;
}

}  // namespace tsl
