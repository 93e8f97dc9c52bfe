#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <type_traits>
#include <vector>

#include "tsl/error.hpp"

namespace tsl {

struct QuadratureOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  int initial_panels = 16;
  int max_depth = 40;
};

namespace detail {

template <class F, class R>
R simpson_recurse(F& f, double lo, double hi, R f_lo, R f_mid, R f_hi, R whole, double eps, int depth) {
  const double mid = 0.5 * (lo + hi);
  const double lm = 0.5 * (lo + mid);
  const double rm = 0.5 * (mid + hi);
  const R f_lm = f(lm);
  const R f_rm = f(rm);
  const R left = (mid - lo) / 6.0 * (f_lo + 4.0 * f_lm + f_mid);
  const R right = (hi - mid) / 6.0 * (f_mid + 4.0 * f_rm + f_hi);
  const R delta = left + right - whole;
  if (std::abs(delta) <= 15.0 * eps) return left + right + delta / 15.0;
  if (depth <= 0) throw NumericalError("adaptive Simpson quadrature did not converge");
  return simpson_recurse(f, lo, mid, f_lo, f_lm, f_mid, left, 0.5 * eps, depth - 1) +
         simpson_recurse(f, mid, hi, f_mid, f_rm, f_hi, right, 0.5 * eps, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson quadrature of f over [lo, hi] with Richardson correction.
/// The interval is first split into `initial_panels` equal panels so that
/// oscillatory integrands are not mistaken for converged on a coarse sample.
/// Converges when the error estimate is below max(abs_tol, rel_tol * |I|),
/// where |I| is estimated from the initial panels.
template <class F>
auto adaptive_simpson(F&& f, double lo, double hi, const QuadratureOptions& opt = {}) {
  using R = std::decay_t<decltype(f(lo))>;
  if (hi == lo) return R{};
  const int panels = std::max(1, opt.initial_panels);
  const double width = (hi - lo) / panels;

  std::vector<R> nodes(2 * panels + 1);
  for (int i = 0; i <= 2 * panels; ++i) nodes[i] = f(lo + 0.5 * width * i);
  double magnitude = 0.0;
  std::vector<R> coarse(panels);
  for (int p = 0; p < panels; ++p) {
    coarse[p] = width / 6.0 * (nodes[2 * p] + 4.0 * nodes[2 * p + 1] + nodes[2 * p + 2]);
    magnitude += width / 6.0 * (std::abs(nodes[2 * p]) + 4.0 * std::abs(nodes[2 * p + 1]) + std::abs(nodes[2 * p + 2]));
  }
  const double eps = std::max(opt.abs_tol, opt.rel_tol * magnitude) / panels;

  R total{};
  for (int p = 0; p < panels; ++p) {
    const double a = lo + width * p;
    const double b = p + 1 == panels ? hi : a + width;
    total += detail::simpson_recurse(f, a, b, nodes[2 * p], nodes[2 * p + 1], nodes[2 * p + 2], coarse[p], eps,
                                     opt.max_depth);
  }
  return total;
}

}  // namespace tsl
