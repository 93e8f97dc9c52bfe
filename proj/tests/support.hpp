// Shared fixtures and independent reference solutions for the test suite.
#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "tsl/problem.hpp"

namespace tsl::testing {

inline std::string problem_path(const std::string& name) { return std::string(TSL_PROBLEM_DIR) + "/" + name + ".json"; }

inline ProblemSpec load(const std::string& name) { return load_problem_file(problem_path(name)); }

inline ProblemSpec p_cont() { return load("p_cont"); }
inline ProblemSpec p_cex() { return load("p_cex"); }
inline ProblemSpec p_trans() { return load("p_trans"); }

/// Plain bisection; f(lo) and f(hi) must differ in sign.
inline double bisect(const std::function<double(double)>& f, double lo, double hi) {
  double flo = f(lo);
  for (int i = 0; i < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Positive roots s of g, found by scanning [0, s_max] in small steps, returned as s^2.
inline std::vector<double> squared_roots(const std::function<double(double)>& g, std::size_t count,
                                         double step = 1e-3) {
  std::vector<double> out;
  for (double s = step; out.size() < count && s < 1e4; s += step) {
    if ((g(s) < 0.0) != (g(s + step) < 0.0)) {
      const double r = bisect(g, s, s + step);
      out.push_back(r * r);
    }
  }
  return out;
}

/// u'' + s^2 u = 0, u(0) = 0, u'(1) = s^2 u(1): u = sin(s x) gives
/// cos s = s sin s, i.e. tan s = 1/s.
inline std::vector<double> cont_eigenvalues(std::size_t count) {
  return squared_roots([](double s) { return s * std::sin(s) - std::cos(s); }, count);
}

/// Hand-derived characteristic function of the transmission problem, as a function of s = sqrt(lambda).
inline double trans_w2(double s) {
  const double sn = std::sin(s), cs = std::cos(s);
  return -2.5 * s * sn * cs - 2.0 * sn * sn + 0.5 * cs * cs;
}

inline std::vector<double> trans_eigenvalues(std::size_t count) { return squared_roots(trans_w2, count); }

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace tsl::testing
