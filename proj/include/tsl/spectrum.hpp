#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "tsl/error.hpp"
#include "tsl/problem.hpp"
#include "tsl/quadrature.hpp"
#include "tsl/resolvent.hpp"
#include "tsl/shooting.hpp"

namespace tsl {

struct Bracket {
  double lo = 0.0;
  double hi = 0.0;
};

/// Consecutive trace samples with a strict sign change of w. A sample that
/// is exactly zero yields the degenerate bracket [lambda, lambda].
inline std::vector<Bracket> scan_brackets(const CharFnTrace& trace) {
  std::vector<Bracket> out;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (trace.w[i] == 0.0) {
      out.push_back({trace.lambda[i], trace.lambda[i]});
      continue;
    }
    if (i + 1 < trace.size() && trace.w[i + 1] != 0.0 && (trace.w[i] < 0.0) != (trace.w[i + 1] < 0.0)) {
      out.push_back({trace.lambda[i], trace.lambda[i + 1]});
    }
  }
  return out;
}

/// Local minima of |w| below `threshold` (relative to the largest |w| in the
/// trace, floored at 1) that are not accompanied by a sign change: candidate
/// double roots, which a sign-change scan cannot see.
inline std::vector<std::string> near_zero_warnings(const CharFnTrace& trace, double threshold = 1e-4) {
  std::vector<std::string> out;
  double scale = 1.0;
  for (double w : trace.w) scale = std::max(scale, std::abs(w));
  for (std::size_t i = 1; i + 1 < trace.size(); ++i) {
    const double m = std::abs(trace.w[i]);
    if (m >= threshold * scale || m > std::abs(trace.w[i - 1]) || m > std::abs(trace.w[i + 1])) continue;
    const bool sign_change = (trace.w[i - 1] < 0.0) != (trace.w[i] < 0.0) || (trace.w[i] < 0.0) != (trace.w[i + 1] < 0.0);
    if (!sign_change) {
      out.push_back("|w| dips to " + detail::format_double(m) + " near lambda = " + detail::format_double(trace.lambda[i]) +
                    " without a sign change");
    }
  }
  return out;
}

struct RefinedRoot {
  double lambda = 0.0;
  double bracket_width = 0.0;
  double residual = 0.0;  // |w(lambda)|
  int iterations = 0;
};

/// Brent's method on a sign-changing bracket of f. Inverse quadratic and
/// secant steps are accepted only while they shrink the bracket fast enough;
/// otherwise the step is a bisection, so convergence is guaranteed. Stops
/// when the bracket is narrower than tol_lambda.
template <class F>
  requires std::is_invocable_r_v<double, F&, double>
RefinedRoot refine_root(F&& f, double lo, double hi, double tol_lambda) {
  if (!(tol_lambda > 0.0)) throw ConfigError("tol_lambda must be positive");
  double a = lo, b = hi;
  double fa = f(a), fb = f(b);
  RefinedRoot out;
  if (fa == 0.0) return {a, 0.0, 0.0, 0};
  if (fb == 0.0) return {b, 0.0, 0.0, 0};
  if ((fa < 0.0) == (fb < 0.0)) throw ConfigError("bracket invalid: w has the same sign at both ends");

  double c = a, fc = fa;
  double d = b - a, e = d;
  for (int iter = 1; iter <= 200; ++iter) {
    if ((fb < 0.0) == (fc < 0.0)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double tol1 = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b) + 0.25 * tol_lambda;
    const double xm = 0.5 * (c - b);
    if (std::abs(xm) <= tol1 || fb == 0.0) {
      out.lambda = b;
      out.bracket_width = std::abs(c - b);
      out.residual = std::abs(fb);
      out.iterations = iter;
      if (fb == 0.0) out.bracket_width = 0.0;
      return out;
    }
    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      const double s = fb / fa;
      double p, q;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        const double qa = fa / fc;
        const double r = fb / fc;
        p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
        q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += std::abs(d) > tol1 ? d : (xm > 0.0 ? tol1 : -tol1);
    fb = f(b);
  }
  throw NumericalError("root refinement did not converge");
}

inline RefinedRoot refine_root(const ProblemSpec& spec, double lo, double hi, double tol_lambda,
                               double tol = kDefaultTol) {
  return refine_root([&](double lam) { return char_fn<double>(spec, lam, tol); }, lo, hi, tol_lambda);
}

struct DerivativeEstimate {
  double value = 0.0;
  double error = 0.0;  // |Richardson value - finer central difference|
};

/// Central difference (f(x+h) - f(x-h)) / 2h at h0 and h0/2 combined by one
/// Richardson step.
template <class F>
DerivativeEstimate central_derivative(F&& f, double x, double h0) {
  if (!(h0 > 0.0)) throw ConfigError("finite-difference step must be positive");
  const double h1 = 0.5 * h0;
  const double d0 = (f(x + h0) - f(x - h0)) / (2.0 * h0);
  const double d1 = (f(x + h1) - f(x - h1)) / (2.0 * h1);
  const double r = (4.0 * d1 - d0) / 3.0;
  return {r, std::abs(r - d1)};
}

/// Default step for differentiating w around lambda. w oscillates in lambda
/// on a scale proportional to sqrt(|lambda|), so the step follows that.
inline double default_derivative_step(double lambda) { return 1e-2 * std::max(1.0, std::sqrt(std::abs(lambda))); }

/// Integrator tolerance used for the w evaluations inside char_fn_derivative.
inline constexpr double kDerivativeTol = 1e-12;

/// w'(lambda_n). Throws when the derivative is too small for the zero to be
/// simple, which means the inputs are inaccurate or the problem is invalid.
inline DerivativeEstimate char_fn_derivative(const ProblemSpec& spec, double lambda_n, double h0,
                                             double tol = kDerivativeTol) {
  double scale = 1.0;
  auto w = [&](double lam) {
    const auto ev = evaluate_char_fn<double>(spec, lam, tol);
    scale = std::max(scale, ev.scale);
    return ev.w;
  };
  const auto d = central_derivative(w, lambda_n, h0);
  if (!(std::abs(d.value) > 1e-6 * scale)) {
    throw NumericalError("zero of w at lambda = " + detail::format_double(lambda_n) +
                         " appears non-simple (w' = " + detail::format_double(d.value) + ")");
  }
  return d;
}

struct CouplingConstant {
  double k = 0.0;
  double x_star = 0.0;
  Side side = Side::left;
  double residual = 0.0;  // max |chi - k phi| / max |chi| over the sample grid
};

inline constexpr double kCouplingResidualTol = 1e-6;

/// k_n with chi(., lambda_n) = k_n phi(., lambda_n), read off where |phi| is
/// largest on the sample grid and verified on the whole grid.
inline CouplingConstant coupling_constant(const FundamentalSolution<double>& phi,
                                          const FundamentalSolution<double>& chi) {
  CouplingConstant out;
  double best = -1.0;
  for (Side s : {Side::left, Side::right}) {
    const auto& samples = phi.solution.on(s).samples();
    const auto& grid = phi.solution.on(s).grid();
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (std::abs(samples[i].u) > best) {
        best = std::abs(samples[i].u);
        out.x_star = grid[i];
        out.side = s;
      }
    }
  }
  if (!(best > 0.0)) throw NumericalError("phi vanishes on the sample grid");
  out.k = chi.solution.at(out.side, out.x_star).u / phi.solution.at(out.side, out.x_star).u;

  double max_chi = 0.0, max_dev = 0.0;
  for (Side s : {Side::left, Side::right}) {
    const auto& ps = phi.solution.on(s).samples();
    const auto& cs = chi.solution.on(s).samples();
    if (ps.size() != cs.size()) throw ConfigError("phi and chi sampled on different grids");
    for (std::size_t i = 0; i < ps.size(); ++i) {
      max_chi = std::max(max_chi, std::abs(cs[i].u));
      max_dev = std::max(max_dev, std::abs(cs[i].u - out.k * ps[i].u));
    }
  }
  out.residual = max_chi > 0.0 ? max_dev / max_chi : 0.0;
  if (!(out.residual <= kCouplingResidualTol)) {
    throw NumericalError("chi is not proportional to phi (residual " + detail::format_double(out.residual) +
                         "); lambda is not an eigenvalue to working accuracy");
  }
  return out;
}

/// One eigenvalue with its normalization data. `psi` is the eigenfunction
/// normalized in the modified inner product, so (psi, psi_beta_prime) has unit norm.
struct Eigenpair {
  int index = 0;
  double lambda = 0.0;
  double k = 0.0;
  double omega_prime = 0.0;
  double omega_prime_error = 0.0;
  double norm_sq = 0.0;             // w'(lambda_n) / k_n
  double norm_sq_quadrature = 0.0;  // direct quadrature of ||Phi_n||^2
  PiecewiseTrajectory<double> psi;
  double psi_beta_prime = 0.0;       // (psi_n)'_beta from the boundary state of psi
  double phi_beta_prime = 0.0;       // (phi_n)'_beta, equal to rho / k_n

  H1Element<double> element() const { return H1Element<double>::from_trajectory(psi, psi_beta_prime); }
};

inline constexpr double kNormIdentityTol = 1e-5;

/// Signed-weight norm g1g2 int_a^c u^2 + d1d2 int_c^b u^2 + (d1d2/rho) ((u)'_beta)^2.
inline double weighted_norm_sq(const ProblemSpec& spec, const PiecewiseTrajectory<double>& u,
                               const QuadratureOptions& quad = {}) {
  auto side = [&](Side s) {
    const auto& tr = u.on(s);
    return adaptive_simpson([&](double x) { const double v = tr.at(x).u; return v * v; }, spec.lower(s), spec.upper(s),
                            quad);
  };
  const double bp = boundary_forms(spec, u).beta_prime;
  return spec.gamma_product() * side(Side::left) + spec.delta_product() * side(Side::right) +
         spec.delta_product() / spec.rho() * bp * bp;
}

/// Builds the eigenpair: norm_sq = w'(lambda_n) / k_n, cross-checked against
/// direct quadrature; psi = phi / ||Phi_n||_1 using the quadrature norm.
inline Eigenpair norm_and_normalize(const ProblemSpec& spec, double lambda_n, const FundamentalSolution<double>& phi,
                                    double k_n, const DerivativeEstimate& omega_prime) {
  Eigenpair e;
  e.lambda = lambda_n;
  e.k = k_n;
  e.omega_prime = omega_prime.value;
  e.omega_prime_error = omega_prime.error;
  e.norm_sq = omega_prime.value / k_n;
  e.norm_sq_quadrature = weighted_norm_sq(spec, phi.solution);
  if (!(e.norm_sq > 0.0) || !(e.norm_sq_quadrature > 0.0)) {
    throw NumericalError("non-positive eigenfunction norm; requires gamma1*gamma2*delta1*delta2 > 0");
  }
  if (!(std::abs(e.norm_sq - e.norm_sq_quadrature) <= kNormIdentityTol * e.norm_sq_quadrature)) {
    throw NumericalError("norm identity violated at lambda = " + detail::format_double(lambda_n) + ": w'/k = " +
                         detail::format_double(e.norm_sq) + ", quadrature = " +
                         detail::format_double(e.norm_sq_quadrature));
  }
  const double inv = 1.0 / std::sqrt(e.norm_sq_quadrature);
  e.psi = phi.solution.scaled(inv);
  e.phi_beta_prime = boundary_forms(spec, phi.solution).beta_prime;
  e.psi_beta_prime = boundary_forms(spec, e.psi).beta_prime;
  return e;
}

struct EigenSearchOptions {
  /// Uniform samples in lambda, or uniform in sqrt(lambda + shift), which
  /// follows the asymptotic eigenvalue spacing and suits wide ranges.
  enum class Spacing { uniform, sqrt };

  std::size_t n_samples = 500;
  Spacing spacing = Spacing::uniform;
  double tol = kDefaultTol;
  double tol_lambda = 1e-12;  // relative to max(1, |lambda|)
  std::size_t grid_points = kDefaultGridPoints;
  bool allow_non_self_adjoint = false;
};

struct EigenSearch {
  std::vector<Eigenpair> eigenpairs;
  std::vector<std::string> warnings;
  CharFnTrace trace;  // the densified trace the brackets came from
};

/// Computes one eigenpair from a refined eigenvalue.
inline Eigenpair eigenpair_at(const ProblemSpec& spec, double lambda_n, const EigenSearchOptions& opt = {}) {
  const auto grid = SampleGrid::uniform(spec, opt.grid_points);
  const auto phi = solve_phi<double>(spec, lambda_n, grid, opt.tol);
  const auto chi = solve_chi<double>(spec, lambda_n, grid, opt.tol);
  const auto k = coupling_constant(phi, chi);
  const auto wp = char_fn_derivative(spec, lambda_n, default_derivative_step(lambda_n));
  return norm_and_normalize(spec, lambda_n, phi, k.k, wp);
}

/// Real eigenvalues in [lambda_min, lambda_max], at most max_count of them
/// (the lowest), indexed from 1. The sign-change scan runs at n_samples and
/// once more at doubled density (midpoints added).
inline EigenSearch find_eigenvalues(const ProblemSpec& spec, double lambda_min, double lambda_max,
                                    std::size_t max_count, const EigenSearchOptions& opt = {}) {
  require_valid(spec);
  if (spec.sign_class() <= 0 && !opt.allow_non_self_adjoint) {
    throw ConfigError("eigenvalue search requires gamma1*gamma2*delta1*delta2 > 0 (override to explore)");
  }
  EigenSearch out;
  CharFnTrace coarse;
  if (opt.spacing == EigenSearchOptions::Spacing::uniform) {
    coarse = char_fn_trace(spec, lambda_min, lambda_max, opt.n_samples, opt.tol);
  } else {
    if (!(lambda_min < lambda_max)) throw ConfigError("eigenvalue search needs lambda_min < lambda_max");
    if (opt.n_samples < 2) throw ConfigError("eigenvalue search needs at least 2 samples");
    const double shift = 1.0 - std::min(0.0, lambda_min);
    const double t0 = std::sqrt(lambda_min + shift);
    const double t1 = std::sqrt(lambda_max + shift);
    coarse.fingerprint = fingerprint(spec);
    for (std::size_t i = 0; i < opt.n_samples; ++i) {
      const double t = t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(opt.n_samples - 1);
      const double lam = i == 0 ? lambda_min : (i + 1 == opt.n_samples ? lambda_max : t * t - shift);
      coarse.lambda.push_back(lam);
      coarse.w.push_back(char_fn<double>(spec, lam, opt.tol));
    }
  }
  CharFnTrace& fine = out.trace;
  fine.fingerprint = coarse.fingerprint;
  for (std::size_t i = 0; i < coarse.size(); ++i) {
    fine.lambda.push_back(coarse.lambda[i]);
    fine.w.push_back(coarse.w[i]);
    if (i + 1 < coarse.size()) {
      const double mid = 0.5 * (coarse.lambda[i] + coarse.lambda[i + 1]);
      fine.lambda.push_back(mid);
      fine.w.push_back(char_fn<double>(spec, mid, opt.tol));
    }
  }
  out.warnings = near_zero_warnings(fine);

  std::vector<double> roots;
  for (const auto& br : scan_brackets(fine)) {
    const double tol_lambda = opt.tol_lambda * std::max(1.0, std::max(std::abs(br.lo), std::abs(br.hi)));
    const double lam = br.lo == br.hi ? br.lo : refine_root(spec, br.lo, br.hi, tol_lambda, opt.tol).lambda;
    if (roots.empty() || std::abs(lam - roots.back()) > 1e-9 * std::max(1.0, std::abs(lam))) roots.push_back(lam);
  }
  std::sort(roots.begin(), roots.end());
  if (roots.size() > max_count) roots.resize(max_count);

  int index = 1;
  for (double lam : roots) {
    Eigenpair e = eigenpair_at(spec, lam, opt);
    e.index = index++;
    out.eigenpairs.push_back(std::move(e));
  }
  return out;
}

}  // namespace tsl
