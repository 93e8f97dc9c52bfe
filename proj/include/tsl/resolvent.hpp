#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "tsl/error.hpp"
#include "tsl/ode.hpp"
#include "tsl/problem.hpp"
#include "tsl/quadrature.hpp"
#include "tsl/shooting.hpp"

namespace tsl {

/// Element (F1, F2) of L2[a,b] + C with the modified inner product.
/// F1 is evaluated one-sidedly: f(Side::left, c) is F1(c-0).
template <class T>
struct H1Element {
  std::function<T(Side, double)> f = [](Side, double) { return T{}; };
  T scalar{};

  static H1Element from_expressions(const PiecewiseExpression& e, T scalar) {
    return {[e](Side s, double x) { return T(e(s, x)); }, scalar};
  }
  static H1Element from_trajectory(PiecewiseTrajectory<T> u, T scalar) {
    return {[u = std::move(u)](Side s, double x) { return u.at(s, x).u; }, scalar};
  }
};

inline H1Element<complex> to_complex(const H1Element<double>& e) {
  return {[f = e.f](Side s, double x) { return complex(f(s, x)); }, complex(e.scalar)};
}

namespace detail {

template <class T>
T conj_if_complex(const T& v) {
  if constexpr (is_complex_v<T>) {
    return std::conj(v);
  } else {
    return v;
  }
}

}  // namespace detail

/// <F, G>_1 = |g1 g2| int_a^c F1 conj(G1) + |d1 d2| int_c^b F1 conj(G1) + (|d1 d2| / rho) F2 conj(G2).
template <class T>
T inner_product(const ProblemSpec& spec, const H1Element<T>& F, const H1Element<T>& G,
                const QuadratureOptions& quad = {}) {
  auto side_integral = [&](Side s) {
    return adaptive_simpson([&](double x) { return F.f(s, x) * detail::conj_if_complex(G.f(s, x)); },
                            spec.lower(s), spec.upper(s), quad);
  };
  return spec.weight(Side::left) * side_integral(Side::left) +
         spec.weight(Side::right) * side_integral(Side::right) +
         spec.scalar_weight() * F.scalar * detail::conj_if_complex(G.scalar);
}

template <class T>
double norm(const ProblemSpec& spec, const H1Element<T>& F, const QuadratureOptions& quad = {}) {
  return std::sqrt(std::abs(inner_product(spec, F, F, quad)));
}

template <class T>
struct BoundaryForms {
  T beta{};        // (u)_beta  = beta1 u(b) - beta2 u'(b)
  T beta_prime{};  // (u)'_beta = beta1p u(b) - beta2p u'(b)
};

template <class T>
BoundaryForms<T> boundary_forms(const ProblemSpec& spec, const StatePair<T>& at_b) {
  return {spec.beta1 * at_b.u - spec.beta2 * at_b.du, spec.beta1p * at_b.u - spec.beta2p * at_b.du};
}

template <class T>
BoundaryForms<T> boundary_forms(const ProblemSpec& spec, const PiecewiseTrajectory<T>& u) {
  return boundary_forms(spec, u.right.upper_state());
}

/// |w(lambda)| at or below this is treated as an eigenvalue (resolvent pole).
template <class T>
double pole_threshold(T lambda) {
  return 1e-8 * (1.0 + std::abs(lambda));
}

template <class T>
struct GreenEval {
  T lambda{};
  double x = 0.0;
  double y = 0.0;
  T value{};
};

/// phi, chi and w at a fixed lambda, reusable for many Green's function
/// evaluations and for the nonhomogeneous solve.
template <class T>
class GreenKernel {
 public:
  GreenKernel(const ProblemSpec& spec, T lambda, const SampleGrid& grid, double tol = kDefaultTol)
      : spec_(spec),
        lambda_(lambda),
        phi_(solve_phi<T>(spec, lambda, grid, tol)),
        chi_(solve_chi<T>(spec, lambda, grid, tol)) {
    const auto w = wronskians(phi_, chi_);
    w_ = spec.delta_product() * w.w2;
    w_left_ = spec.gamma_product() * w.w1;
    if (std::abs(w_) <= pole_threshold(lambda)) {
      throw ResolventPole("resolvent pole: |w(lambda)| = " + detail::format_double(std::abs(w_)) +
                          " is below the eigenvalue threshold " + detail::format_double(pole_threshold(lambda)));
    }
  }

  const ProblemSpec& spec() const noexcept { return spec_; }
  T lambda() const noexcept { return lambda_; }
  T w() const noexcept { return w_; }
  /// gamma1 gamma2 w1, the left-interface route to w.
  T w_left() const noexcept { return w_left_; }
  const FundamentalSolution<T>& phi() const noexcept { return phi_; }
  const FundamentalSolution<T>& chi() const noexcept { return chi_; }

  Side side_of(double x) const {
    if (x == spec_.c) throw ConfigError("Green's function is not defined at the transmission point");
    return x < spec_.c ? Side::left : Side::right;
  }

  /// G1(x, y) = phi(min(x,y)) chi(max(x,y)) / w.
  T operator()(double x, double y) const {
    const double lo = std::min(x, y);
    const double hi = std::max(x, y);
    return phi_.solution.at(side_of(lo), lo).u * chi_.solution.at(side_of(hi), hi).u / w_;
  }

 private:
  ProblemSpec spec_;
  T lambda_;
  FundamentalSolution<T> phi_;
  FundamentalSolution<T> chi_;
  T w_{};
  T w_left_{};
};

template <class T>
GreenEval<T> greens_function(const ProblemSpec& spec, T lambda, double x, double y, double tol = kDefaultTol) {
  GreenKernel<T> kernel(spec, lambda, SampleGrid::endpoints(spec), tol);
  return {lambda, x, y, kernel(x, y)};
}

namespace detail {

// Knot grid for the nonhomogeneous solve: the requested samples plus both
// subinterval limits.
inline std::vector<double> with_limits(std::vector<double> g, double lo, double hi) {
  g.push_back(lo);
  g.push_back(hi);
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  if (g.front() < lo || g.back() > hi) throw ConfigError("sample grid leaves the subinterval");
  return g;
}

}  // namespace detail

/// Unique solution of
///
///     u'' + (lambda - q) u = F1 on [a,c) U (c,b],
///     alpha1 u(a) + alpha2 u'(a) = 0,
///     (u)_beta + lambda (u)'_beta = F2,
///
/// with homogeneous transmission conditions, assembled from the Green's
/// function representation
///
///     u(x) = g1g2 int_a^c G1(x,y) F1 dy + d1d2 int_c^b G1(x,y) F1 dy + d1d2 F2 phi(x) / w.
///
/// The running integrals are accumulated panel by panel between grid
/// points; the result is exact at the knots and Hermite-interpolated between.
template <class T>
PiecewiseTrajectory<T> solve_nonhomogeneous(const GreenKernel<T>& kernel, const H1Element<T>& F,
                                            const SampleGrid& grid) {
  const ProblemSpec& spec = kernel.spec();
  const T lambda = kernel.lambda();
  const T w = kernel.w();
  const double gg = spec.gamma_product();
  const double dd = spec.delta_product();
  QuadratureOptions panel_quad;
  panel_quad.abs_tol = 1e-14;
  panel_quad.rel_tol = 1e-12;
  panel_quad.initial_panels = 1;

  struct SideData {
    std::vector<double> x;
    std::vector<T> cum_phi;  // int_lower^x phi F1
    std::vector<T> cum_chi;  // int_lower^x chi F1
  };
  auto accumulate = [&](Side s) {
    SideData d;
    d.x = detail::with_limits(grid.on(s), spec.lower(s), spec.upper(s));
    const auto& phi = kernel.phi().solution.on(s);
    const auto& chi = kernel.chi().solution.on(s);
    d.cum_phi.assign(d.x.size(), T{});
    d.cum_chi.assign(d.x.size(), T{});
    for (std::size_t i = 1; i < d.x.size(); ++i) {
      const T ip = adaptive_simpson([&](double y) { return phi.at(y).u * F.f(s, y); }, d.x[i - 1], d.x[i], panel_quad);
      const T ic = adaptive_simpson([&](double y) { return chi.at(y).u * F.f(s, y); }, d.x[i - 1], d.x[i], panel_quad);
      d.cum_phi[i] = d.cum_phi[i - 1] + ip;
      d.cum_chi[i] = d.cum_chi[i - 1] + ic;
    }
    return d;
  };
  const SideData left = accumulate(Side::left);
  const SideData right = accumulate(Side::right);
  const T left_phi_total = left.cum_phi.back();
  const T right_chi_total = right.cum_chi.back();

  auto build = [&](Side s, const SideData& d) {
    const auto& phi = kernel.phi().solution.on(s);
    const auto& chi = kernel.chi().solution.on(s);
    const double weight = s == Side::left ? gg : dd;
    using Knot = typename Trajectory<T>::Knot;
    std::vector<Knot> knots;
    knots.reserve(d.x.size());
    for (std::size_t i = 0; i < d.x.size(); ++i) {
      const double x = d.x[i];
      const auto p = phi.at(x);
      const auto q = chi.at(x);
      const T below = d.cum_phi[i];                    // int_lower^x phi F1
      const T above = d.cum_chi.back() - d.cum_chi[i];  // int_x^upper chi F1
      // Coefficients of chi(x) and phi(x) in u(x).
      T chi_coef = weight * below;
      T phi_coef = weight * above + dd * F.scalar;
      if (s == Side::left) {
        phi_coef += dd * right_chi_total;
      } else {
        chi_coef += gg * left_phi_total;
      }
      StatePair<T> st{(chi_coef * q.u + phi_coef * p.u) / w, (chi_coef * q.du + phi_coef * p.du) / w};
      const T ddu = (spec.q(s, x) - lambda) * st.u + F.f(s, x);
      knots.push_back({x, st, ddu});
    }
    Trajectory<T> traj(s, std::move(knots));
    traj.resample(grid.on(s));
    return traj;
  };
  return {build(Side::left, left), build(Side::right, right)};
}

template <class T>
PiecewiseTrajectory<T> solve_nonhomogeneous(const ProblemSpec& spec, T lambda, const H1Element<T>& F,
                                            const SampleGrid& grid, double tol = kDefaultTol) {
  const GreenKernel<T> kernel(spec, lambda, grid, tol);
  return solve_nonhomogeneous(kernel, F, grid);
}

/// U(F, lambda) = (u, (u)'_beta): the resolvent (lambda - A)^{-1} applied to F.
template <class T>
struct ResolventResult {
  PiecewiseTrajectory<T> u;
  T beta_prime{};

  H1Element<T> element() const { return H1Element<T>::from_trajectory(u, beta_prime); }
};

template <class T>
ResolventResult<T> apply_resolvent(const ProblemSpec& spec, T lambda, const H1Element<T>& F, const SampleGrid& grid,
                                   double tol = kDefaultTol) {
  ResolventResult<T> out;
  out.u = solve_nonhomogeneous(spec, lambda, F, grid, tol);
  out.beta_prime = boundary_forms(spec, out.u).beta_prime;
  return out;
}

}  // namespace tsl
