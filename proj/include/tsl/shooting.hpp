#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "tsl/error.hpp"
#include "tsl/ode.hpp"
#include "tsl/problem.hpp"

namespace tsl {

inline constexpr double kDefaultTol = 1e-10;
inline constexpr std::size_t kDefaultGridPoints = 201;

/// Sample abscissae for both sides of c.
struct SampleGrid {
  std::vector<double> left;
  std::vector<double> right;

  const std::vector<double>& on(Side s) const { return s == Side::left ? left : right; }

  static SampleGrid uniform(const ProblemSpec& spec, std::size_t n_per_side = kDefaultGridPoints) {
    return {uniform_grid(spec, Side::left, n_per_side), uniform_grid(spec, Side::right, n_per_side)};
  }
  /// Just the subinterval limits; enough when only interface states are needed.
  static SampleGrid endpoints(const ProblemSpec& spec) { return uniform(spec, 2); }
};

/// A function on [a, c) U (c, b] given by one trajectory per side.
template <class T>
struct PiecewiseTrajectory {
  Trajectory<T> left;
  Trajectory<T> right;

  const Trajectory<T>& on(Side s) const { return s == Side::left ? left : right; }
  StatePair<T> at(Side s, double x) const { return on(s).at(x); }
  /// Side chosen from x; x == c is ambiguous and resolves to the left limit.
  StatePair<T> at(double x) const { return x > left.upper() ? right.at(x) : left.at(x); }

  PiecewiseTrajectory scaled(T factor) const { return {left.scaled(factor), right.scaled(factor)}; }
};

enum class SolutionKind { phi, chi };

/// phi satisfies the condition at a, chi the lambda-dependent condition at b;
/// both satisfy the transmission conditions exactly at c.
template <class T>
struct FundamentalSolution {
  SolutionKind kind = SolutionKind::phi;
  T lambda{};
  PiecewiseTrajectory<T> solution;

  const Trajectory<T>& left() const { return solution.left; }
  const Trajectory<T>& right() const { return solution.right; }
};

/// phi: starts at a with (alpha2, -alpha1) and crosses c with
/// u(c+0) = (gamma1/delta1) u(c-0), u'(c+0) = (gamma2/delta2) u'(c-0).
template <class T>
FundamentalSolution<T> solve_phi(const ProblemSpec& spec, T lambda, const SampleGrid& grid, double tol = kDefaultTol) {
  FundamentalSolution<T> out;
  out.kind = SolutionKind::phi;
  out.lambda = lambda;
  const StatePair<T> start{T(spec.alpha2), T(-spec.alpha1)};
  out.solution.left = integrate<T>(spec, lambda, Side::left, Direction::forward, start, grid.left, tol);
  const auto& at_c = out.solution.left.upper_state();
  const StatePair<T> across{(spec.gamma1 / spec.delta1) * at_c.u, (spec.gamma2 / spec.delta2) * at_c.du};
  out.solution.right = integrate<T>(spec, lambda, Side::right, Direction::forward, across, grid.right, tol);
  return out;
}

/// chi: starts at b with (beta2p lambda + beta2, beta1p lambda + beta1) and
/// crosses c with u(c-0) = (delta1/gamma1) u(c+0), u'(c-0) = (delta2/gamma2) u'(c+0).
template <class T>
FundamentalSolution<T> solve_chi(const ProblemSpec& spec, T lambda, const SampleGrid& grid, double tol = kDefaultTol) {
  FundamentalSolution<T> out;
  out.kind = SolutionKind::chi;
  out.lambda = lambda;
  const StatePair<T> start{spec.beta2p * lambda + spec.beta2, spec.beta1p * lambda + spec.beta1};
  out.solution.right = integrate<T>(spec, lambda, Side::right, Direction::backward, start, grid.right, tol);
  const auto& at_c = out.solution.right.lower_state();
  const StatePair<T> across{(spec.delta1 / spec.gamma1) * at_c.u, (spec.delta2 / spec.gamma2) * at_c.du};
  out.solution.left = integrate<T>(spec, lambda, Side::left, Direction::backward, across, grid.left, tol);
  return out;
}

template <class T>
T wronskian(const StatePair<T>& p, const StatePair<T>& q) {
  return p.u * q.du - q.u * p.du;
}

template <class T>
struct Wronskians {
  T w1{};  // W(phi, chi) at c-0
  T w2{};  // W(phi, chi) at c+0
};

template <class T>
Wronskians<T> wronskians(const FundamentalSolution<T>& phi, const FundamentalSolution<T>& chi) {
  return {wronskian(phi.left().upper_state(), chi.left().upper_state()),
          wronskian(phi.right().lower_state(), chi.right().lower_state())};
}

/// Both routes to w(lambda) plus the magnitude of the terms that cancel in
/// the Wronskians, which is the natural scale for judging |w|.
template <class T>
struct CharFnEvaluation {
  T w{};          // delta1 delta2 w2
  T w_left{};     // gamma1 gamma2 w1
  double scale = 0.0;
};

inline constexpr double kCharFnConsistencyTol = 1e-7;

template <class T>
double wronskian_scale(const StatePair<T>& p, const StatePair<T>& q) {
  return std::abs(p.u * q.du) + std::abs(q.u * p.du);
}

/// Only the interface states enter w, so phi is integrated over [a, c] and
/// chi over [c, b]; the other halves follow from the transmission conditions.
template <class T>
CharFnEvaluation<T> evaluate_char_fn(const ProblemSpec& spec, T lambda, double tol = kDefaultTol) {
  const auto grid = SampleGrid::endpoints(spec);
  const StatePair<T> phi_a{T(spec.alpha2), T(-spec.alpha1)};
  const StatePair<T> chi_b{spec.beta2p * lambda + spec.beta2, spec.beta1p * lambda + spec.beta1};
  const StatePair<T> phi_l =
      integrate<T>(spec, lambda, Side::left, Direction::forward, phi_a, grid.left, tol).upper_state();
  const StatePair<T> chi_r =
      integrate<T>(spec, lambda, Side::right, Direction::backward, chi_b, grid.right, tol).lower_state();
  const StatePair<T> phi_r{(spec.gamma1 / spec.delta1) * phi_l.u, (spec.gamma2 / spec.delta2) * phi_l.du};
  const StatePair<T> chi_l{(spec.delta1 / spec.gamma1) * chi_r.u, (spec.delta2 / spec.gamma2) * chi_r.du};
  CharFnEvaluation<T> out;
  out.w = spec.delta_product() * wronskian(phi_r, chi_r);
  out.w_left = spec.gamma_product() * wronskian(phi_l, chi_l);
  out.scale = std::max(std::abs(spec.delta_product()) * wronskian_scale(phi_r, chi_r),
                       std::abs(spec.gamma_product()) * wronskian_scale(phi_l, chi_l));
  if (!(std::abs(out.w - out.w_left) <= kCharFnConsistencyTol * std::max(out.scale, 1e-300))) {
    throw NumericalError("characteristic function consistency failure at lambda = " + std::to_string(std::abs(lambda)) +
                         ": gamma1*gamma2*w1 and delta1*delta2*w2 differ by " +
                         std::to_string(std::abs(out.w - out.w_left)));
  }
  return out;
}

/// w(lambda) = delta1 delta2 w2(lambda), cross-checked against gamma1 gamma2 w1(lambda).
template <class T>
T char_fn(const ProblemSpec& spec, T lambda, double tol = kDefaultTol) {
  return evaluate_char_fn<T>(spec, lambda, tol).w;
}

/// Samples of w on a uniform real lambda grid.
struct CharFnTrace {
  std::vector<double> lambda;
  std::vector<double> w;
  std::string fingerprint;

  std::size_t size() const noexcept { return lambda.size(); }
};

inline CharFnTrace char_fn_trace(const ProblemSpec& spec, double lambda_min, double lambda_max, std::size_t n_samples,
                                 double tol = kDefaultTol) {
  if (!(lambda_min < lambda_max)) throw ConfigError("char_fn_trace needs lambda_min < lambda_max");
  if (n_samples < 2) throw ConfigError("char_fn_trace needs at least 2 samples");
  CharFnTrace trace;
  trace.fingerprint = fingerprint(spec);
  trace.lambda.resize(n_samples);
  trace.w.resize(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(n_samples - 1);
    const double lam = i + 1 == n_samples ? lambda_max : lambda_min + (lambda_max - lambda_min) * t;
    trace.lambda[i] = lam;
    trace.w[i] = char_fn<double>(spec, lam, tol);
  }
  return trace;
}

}  // namespace tsl
