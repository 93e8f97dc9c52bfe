#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "tsl/error.hpp"
#include "tsl/problem.hpp"
#include "tsl/quadrature.hpp"
#include "tsl/resolvent.hpp"
#include "tsl/spectrum.hpp"

namespace tsl {

/// C_n(F) = <F, Psi_n>_1.
inline double fourier_coefficient(const ProblemSpec& spec, const H1Element<double>& F, const Eigenpair& eig,
                                  const QuadratureOptions& quad = {}) {
  return inner_product(spec, F, eig.element(), quad);
}

struct DomainReport {
  double bc_a_residual = 0.0;
  std::array<double, 2> transmission_residuals{};  // function value, derivative
  bool left_smooth = false;
  bool right_smooth = false;
  bool member = false;
  double f2 = 0.0;  // (f)'_beta, the second component of the D(A) element
};

inline constexpr double kDomainTol = 1e-8;
inline constexpr double kDomainStep = 1e-6;

namespace detail {

// Second-order one-sided difference pointing into [lo, hi] from an endpoint.
inline double endpoint_derivative(const Expression& f, double x, bool from_left_end) {
  const double h = from_left_end ? kDomainStep : -kDomainStep;
  return (-3.0 * f(x) + 4.0 * f(x + h) - f(x + 2 * h)) / (2.0 * h);
}

// Central difference, falling back to one-sided within one step of an end.
inline double expr_derivative(const Expression& f, double x, double lo, double hi) {
  if (x - kDomainStep < lo) return endpoint_derivative(f, x, true);
  if (x + kDomainStep > hi) return endpoint_derivative(f, x, false);
  return (f(x + kDomainStep) - f(x - kDomainStep)) / (2.0 * kDomainStep);
}

inline bool smooth_on(const Expression& f, double lo, double hi) {
  try {
    for (int i = 0; i < kValidationSamples; ++i) {
      const double x = lo + (hi - lo) * i / (kValidationSamples - 1);
      if (!std::isfinite(f(x)) || !std::isfinite(expr_derivative(f, x, lo, hi))) return false;
    }
  } catch (const DomainError&) {
    return false;
  }
  return true;
}

inline double relative_residual(double value, double scale) { return std::abs(value) / std::max(1.0, scale); }

}  // namespace detail

/// Checks whether f (with second component (f)'_beta) lies in the operator
/// domain: condition at a and both transmission conditions, each relative to
/// the magnitude of its terms (floored at 1). Derivatives are one-sided
/// second-order differences with step 1e-6 taken inside each subinterval.
inline DomainReport check_domain(const ProblemSpec& spec, const PiecewiseExpression& f) {
  DomainReport r;
  r.left_smooth = detail::smooth_on(f.left, spec.a, spec.c);
  r.right_smooth = detail::smooth_on(f.right, spec.c, spec.b);
  if (!r.left_smooth || !r.right_smooth) {
    r.bc_a_residual = r.transmission_residuals[0] = r.transmission_residuals[1] = INFINITY;
    return r;
  }
  const double fa = f.left(spec.a);
  const double dfa = detail::endpoint_derivative(f.left, spec.a, true);
  const double fcl = f.left(spec.c);
  const double dfcl = detail::endpoint_derivative(f.left, spec.c, false);
  const double fcr = f.right(spec.c);
  const double dfcr = detail::endpoint_derivative(f.right, spec.c, true);
  const double fb = f.right(spec.b);
  const double dfb = detail::endpoint_derivative(f.right, spec.b, false);

  r.bc_a_residual = detail::relative_residual(spec.alpha1 * fa + spec.alpha2 * dfa,
                                              std::abs(spec.alpha1 * fa) + std::abs(spec.alpha2 * dfa));
  r.transmission_residuals[0] = detail::relative_residual(spec.gamma1 * fcl - spec.delta1 * fcr,
                                                          std::abs(spec.gamma1 * fcl) + std::abs(spec.delta1 * fcr));
  r.transmission_residuals[1] = detail::relative_residual(spec.gamma2 * dfcl - spec.delta2 * dfcr,
                                                          std::abs(spec.gamma2 * dfcl) + std::abs(spec.delta2 * dfcr));
  r.f2 = spec.beta1p * fb - spec.beta2p * dfb;
  r.member = r.bc_a_residual <= kDomainTol && r.transmission_residuals[0] <= kDomainTol &&
             r.transmission_residuals[1] <= kDomainTol;
  return r;
}

/// Expansion targets are sampled on each side, keeping 1e-9 away from c.
inline SampleGrid expansion_grid(const ProblemSpec& spec, std::size_t n_per_side = kDefaultGridPoints) {
  constexpr double kGap = 1e-9;
  SampleGrid g = SampleGrid::uniform(spec, n_per_side);
  g.left.back() = spec.c - kGap;
  g.right.front() = spec.c + kGap;
  return g;
}

struct ExpansionPoint {
  Side side = Side::left;
  double x = 0.0;
  double f = 0.0;
  double partial_sum = 0.0;
  double abs_error = 0.0;
};

struct ExpansionResult {
  std::vector<double> coefficients;  // C_1 .. C_N
  std::vector<ExpansionPoint> points;
  double max_error = 0.0;
  double norm_sq = 0.0;           // <F, F>_1
  double parseval_defect = 0.0;   // |<F,F>_1 - sum C_n^2| / <F,F>_1
};

/// Partial sum sum_n C_n(F) psi_n over the given eigenpairs, compared with F1
/// on `grid`.
inline ExpansionResult expand(const ProblemSpec& spec, const H1Element<double>& F, std::span<const Eigenpair> eigs,
                              const SampleGrid& grid) {
  if (eigs.empty()) throw ConfigError("expansion needs at least one eigenpair");
  ExpansionResult r;
  r.coefficients.reserve(eigs.size());
  double sum_sq = 0.0;
  for (const auto& e : eigs) {
    const double cn = fourier_coefficient(spec, F, e);
    r.coefficients.push_back(cn);
    sum_sq += cn * cn;
  }
  for (Side s : {Side::left, Side::right}) {
    for (double x : grid.on(s)) {
      ExpansionPoint p;
      p.side = s;
      p.x = x;
      p.f = F.f(s, x);
      for (std::size_t n = 0; n < eigs.size(); ++n) p.partial_sum += r.coefficients[n] * eigs[n].psi.at(s, x).u;
      p.abs_error = std::abs(p.f - p.partial_sum);
      r.max_error = std::max(r.max_error, p.abs_error);
      r.points.push_back(p);
    }
  }
  r.norm_sq = inner_product(spec, F, F);
  r.parseval_defect = r.norm_sq > 0.0 ? std::abs(r.norm_sq - sum_sq) / r.norm_sq : 0.0;
  return r;
}

/// Largest deviation of the term-by-term differentiated partial sum from f'
/// on the grid (f' by finite differences).
inline double differentiated_max_error(const ProblemSpec& spec, const PiecewiseExpression& f,
                                       std::span<const double> coefficients, std::span<const Eigenpair> eigs,
                                       const SampleGrid& grid) {
  double worst = 0.0;
  const std::size_t n_terms = std::min(coefficients.size(), eigs.size());
  for (Side s : {Side::left, Side::right}) {
    const Expression& e = s == Side::left ? f.left : f.right;
    for (double x : grid.on(s)) {
      double sum = 0.0;
      for (std::size_t n = 0; n < n_terms; ++n) sum += coefficients[n] * eigs[n].psi.at(s, x).du;
      worst = std::max(worst, std::abs(detail::expr_derivative(e, x, spec.lower(s), spec.upper(s)) - sum));
    }
  }
  return worst;
}

/// Defect of the two-integral Parseval equality for (f, 0):
///
///     LHS = g1g2 int_a^c f^2 + d1d2 int_c^b f^2,
///     defect = |LHS - sum_n |g1g2 int_a^c f psi_n + d1d2 int_c^b f psi_n|^2| / LHS,
///
/// 0 when f vanishes identically.
inline double parseval_defect(const ProblemSpec& spec, const PiecewiseExpression& f, std::span<const Eigenpair> eigs,
                              const QuadratureOptions& quad = {}) {
  auto weighted = [&](auto&& integrand) {
    return spec.gamma_product() * adaptive_simpson([&](double x) { return integrand(Side::left, x); }, spec.a, spec.c, quad) +
           spec.delta_product() * adaptive_simpson([&](double x) { return integrand(Side::right, x); }, spec.c, spec.b, quad);
  };
  const double lhs = weighted([&](Side s, double x) { const double v = f(s, x); return v * v; });
  if (lhs == 0.0) return 0.0;
  double sum = 0.0;
  for (const auto& e : eigs) {
    const double cn = weighted([&](Side s, double x) { return f(s, x) * e.psi.at(s, x).u; });
    sum += cn * cn;
  }
  return std::abs(lhs - sum) / lhs;
}

}  // namespace tsl
