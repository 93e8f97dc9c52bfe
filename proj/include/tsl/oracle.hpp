#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "tsl/error.hpp"
#include "tsl/problem.hpp"
#include "tsl/spectrum.hpp"

namespace tsl {

/// Dense symmetric matrix, row-major.
class SymmetricMatrix {
 public:
  SymmetricMatrix() = default;
  explicit SymmetricMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }

  /// Adds v to (i, j) and, off the diagonal, to (j, i).
  void add(std::size_t i, std::size_t j, double v) {
    data_[i * n_ + j] += v;
    if (i != j) data_[j * n_ + i] += v;
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

/// Finite-difference pencil K v = lambda M v for the transmission problem.
///
/// Unknowns, in order: u(a) (only when alpha2 != 0; otherwise u(a) = 0 is
/// eliminated), the n_left - 1 interior left nodes, the interface value
/// u(c-0) (u(c+0) = gamma1/delta1 * u(c-0) is implied), the n_right - 1
/// interior right nodes, u(b), and the boundary component (u)'_beta (only
/// when beta2p != 0; otherwise it is beta1p * u(b)).
///
/// Three-point central differences with half-cell (lumped) mass at the
/// subinterval ends; each row is scaled by gamma1*gamma2*h_left or
/// delta1*delta2*h_right, so the derivative transmission condition and the
/// lambda-dependent condition at b enter as natural conditions and both
/// matrices come out symmetric. M is diagonal; the ordering keeps K
/// tridiagonal.
struct DiscreteProblem {
  double h_left = 0.0;
  double h_right = 0.0;
  std::size_t n_left = 0;
  std::size_t n_right = 0;
  SymmetricMatrix K;
  SymmetricMatrix M;
  bool has_u_a = false;
  bool has_boundary_unknown = false;
  double left_weight = 0.0;    // gamma1 gamma2
  double right_weight = 0.0;   // delta1 delta2
  double scalar_weight = 0.0;  // delta1 delta2 / rho

  std::size_t dimension() const noexcept { return K.size(); }
};

inline DiscreteProblem discretize(const ProblemSpec& spec, std::size_t n_left, std::size_t n_right) {
  require_valid(spec);
  if (n_left < 8 || n_right < 8) throw ConfigError("discretize needs at least 8 cells per side");
  if (spec.sign_class() <= 0) {
    throw ConfigError(
        "finite-difference oracle needs gamma1*gamma2*delta1*delta2 > 0 (the pencil is not symmetrizable); "
        "inspect the characteristic function trace instead");
  }
  DiscreteProblem dp;
  dp.n_left = n_left;
  dp.n_right = n_right;
  dp.h_left = (spec.c - spec.a) / static_cast<double>(n_left);
  dp.h_right = (spec.b - spec.c) / static_cast<double>(n_right);
  dp.has_u_a = spec.alpha2 != 0.0;
  dp.has_boundary_unknown = spec.beta2p != 0.0;
  dp.left_weight = spec.gamma_product();
  dp.right_weight = spec.delta_product();
  dp.scalar_weight = spec.delta_product() / spec.rho();

  const std::size_t off = dp.has_u_a ? 1 : 0;
  const std::size_t iface = off + n_left - 1;
  const std::size_t ub = iface + n_right;
  const std::size_t dim = ub + 1 + (dp.has_boundary_unknown ? 1 : 0);
  dp.K = SymmetricMatrix(dim);
  dp.M = SymmetricMatrix(dim);

  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  const double gg = dp.left_weight;
  const double dd = dp.right_weight;
  const double ratio = spec.gamma1 / spec.delta1;  // u(c+0) per unit u(c-0)

  // Left nodes x_i = a + i h, i = 0..n_left; node n_left is the interface.
  auto left_index = [&](std::size_t i) -> std::size_t {
    if (i == 0) return dp.has_u_a ? 0 : kNone;
    return off + i - 1;
  };
  // Right nodes y_j = c + j h, j = 0..n_right, with coefficient on the unknown.
  auto right_index = [&](std::size_t j) -> std::size_t { return j == 0 ? iface : iface + j; };
  auto right_coef = [&](std::size_t j) { return j == 0 ? ratio : 1.0; };

  auto add_element = [&](std::size_t i0, double c0, std::size_t i1, double c1, double stiffness) {
    if (i0 != kNone) dp.K.add(i0, i0, stiffness * c0 * c0);
    if (i1 != kNone) dp.K.add(i1, i1, stiffness * c1 * c1);
    if (i0 != kNone && i1 != kNone) dp.K.add(i0, i1, -stiffness * c0 * c1);
  };

  const double hl = dp.h_left;
  for (std::size_t i = 0; i < n_left; ++i) add_element(left_index(i), 1.0, left_index(i + 1), 1.0, gg / hl);
  for (std::size_t i = 0; i <= n_left; ++i) {
    const std::size_t k = left_index(i);
    if (k == kNone) continue;
    const double x = i == n_left ? spec.c : spec.a + hl * static_cast<double>(i);
    const double cell = (i == 0 || i == n_left) ? 0.5 * hl : hl;
    dp.K.add(k, k, gg * cell * spec.q_left(x));
    dp.M.add(k, k, gg * cell);
  }

  const double hr = dp.h_right;
  for (std::size_t j = 0; j < n_right; ++j) {
    add_element(right_index(j), right_coef(j), right_index(j + 1), right_coef(j + 1), dd / hr);
  }
  for (std::size_t j = 0; j <= n_right; ++j) {
    const std::size_t k = right_index(j);
    const double y = j == n_right ? spec.b : spec.c + hr * static_cast<double>(j);
    const double cell = (j == 0 || j == n_right) ? 0.5 * hr : hr;
    const double cf = right_coef(j);
    dp.K.add(k, k, dd * cell * spec.q_right(y) * cf * cf);
    dp.M.add(k, k, dd * cell * cf * cf);
  }

  if (dp.has_u_a) dp.K.add(0, 0, -gg * spec.alpha1 / spec.alpha2);

  if (dp.has_boundary_unknown) {
    // Boundary block in (u(b), U2 = (u)'_beta):
    // (d1d2/beta2p) [-beta1p u(b)^2 + 2 U2 u(b) - (beta2/rho) U2^2], mass (d1d2/rho) U2^2.
    const double s = dd / spec.beta2p;
    dp.K.add(ub, ub, -s * spec.beta1p);
    dp.K.add(ub, ub + 1, s);
    dp.K.add(ub + 1, ub + 1, -s * spec.beta2 / spec.rho());
    dp.M.add(ub + 1, ub + 1, dp.scalar_weight);
  } else {
    // (u)'_beta = beta1p u(b) and (u)_beta = beta1 u(b) - beta2 u'(b).
    dp.K.add(ub, ub, -dd * spec.beta1 / spec.beta2);
    dp.M.add(ub, ub, dp.scalar_weight * spec.beta1p * spec.beta1p);
  }
  return dp;
}

/// Pivots of the LDL^T factorization of a symmetric matrix (no pivoting).
inline std::vector<double> ldlt_pivots(const SymmetricMatrix& A) {
  const std::size_t n = A.size();
  std::vector<double> L(n * n, 0.0), D(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double d = A(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= L[j * n + k] * L[j * n + k] * D[k];
    D[j] = d;
    if (d == 0.0) throw NumericalError("LDL^T factorization hit a zero pivot");
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = A(i, j);
      if (v == 0.0) {
        bool any = false;
        for (std::size_t k = 0; k < j && !any; ++k) any = L[i * n + k] != 0.0 && L[j * n + k] != 0.0;
        if (!any) continue;
      }
      for (std::size_t k = 0; k < j; ++k) v -= L[i * n + k] * L[j * n + k] * D[k];
      L[i * n + j] = v / d;
    }
  }
  return D;
}

struct OracleEigen {
  std::vector<double> values;
  std::vector<std::vector<double>> vectors;  // generalized eigenvectors, M-normalized
};

namespace detail {

struct Tridiagonal {
  std::vector<double> diag;
  std::vector<double> off;  // off[i] couples i and i+1
};

// Number of eigenvalues of the tridiagonal matrix below x (Sturm count).
inline std::size_t sturm_count(const Tridiagonal& t, double x) {
  std::size_t count = 0;
  double q = 1.0;
  const double tiny = std::numeric_limits<double>::min() / std::numeric_limits<double>::epsilon();
  for (std::size_t i = 0; i < t.diag.size(); ++i) {
    const double e2 = i == 0 ? 0.0 : t.off[i - 1] * t.off[i - 1];
    q = t.diag[i] - x - e2 / q;
    if (q == 0.0) q = -tiny;
    if (q < 0.0) ++count;
  }
  return count;
}

// Solves (T - shift) y = rhs for tridiagonal T by Gaussian elimination with
// partial pivoting.
inline std::vector<double> tridiagonal_solve(const Tridiagonal& t, double shift, std::vector<double> rhs) {
  const std::size_t n = t.diag.size();
  // Banded LU with partial pivoting: rows get up to two super-diagonals.
  std::vector<double> a(n, 0.0), b(n, 0.0), c(n, 0.0), d(n, 0.0);  // sub, diag, super1, super2
  for (std::size_t i = 0; i < n; ++i) {
    b[i] = t.diag[i] - shift;
    if (i + 1 < n) c[i] = t.off[i];
    if (i > 0) a[i] = t.off[i - 1];
  }
  const double eps = std::numeric_limits<double>::epsilon();
  double norm = 0.0;
  for (std::size_t i = 0; i < n; ++i) norm = std::max(norm, std::abs(b[i]) + std::abs(a[i]) + std::abs(c[i]));
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (std::abs(a[i + 1]) > std::abs(b[i])) {
      std::swap(b[i], a[i + 1]);
      std::swap(c[i], b[i + 1]);
      std::swap(d[i], c[i + 1]);
      std::swap(rhs[i], rhs[i + 1]);
    }
    if (b[i] == 0.0) b[i] = eps * norm;
    const double m = a[i + 1] / b[i];
    b[i + 1] -= m * c[i];
    c[i + 1] -= m * d[i];
    rhs[i + 1] -= m * rhs[i];
  }
  if (b[n - 1] == 0.0) b[n - 1] = eps * norm;
  std::vector<double> y(n);
  for (std::size_t k = n; k-- > 0;) {
    double v = rhs[k];
    if (k + 1 < n) v -= c[k] * y[k + 1];
    if (k + 2 < n) v -= d[k] * y[k + 2];
    y[k] = v / b[k];
  }
  return y;
}

}  // namespace detail

/// Smallest `count` eigenvalues (ascending) and M-orthonormal eigenvectors of
/// K v = lambda M v. M must be diagonal and positive and K tridiagonal, which
/// discretize() guarantees; the pencil is reduced to the symmetric
/// tridiagonal M^{-1/2} K M^{-1/2}, eigenvalues come from Sturm-sequence
/// bisection and eigenvectors from inverse iteration.
inline OracleEigen oracle_eigenvalues(const DiscreteProblem& dp, std::size_t count) {
  const std::size_t n = dp.dimension();
  if (count > n) throw ConfigError("requested more eigenvalues than the pencil dimension");
  std::vector<double> msqrt(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(dp.M(i, i) > 0.0)) throw NumericalError("mass matrix is not positive definite");
    msqrt[i] = std::sqrt(dp.M(i, i));
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i && dp.M(i, j) != 0.0) throw NumericalError("mass matrix is not diagonal");
      if (j + 1 < i || j > i + 1) {
        if (dp.K(i, j) != 0.0) throw NumericalError("stiffness matrix is not tridiagonal");
      }
    }
  }
  detail::Tridiagonal t;
  t.diag.resize(n);
  t.off.resize(n > 0 ? n - 1 : 0);
  for (std::size_t i = 0; i < n; ++i) {
    t.diag[i] = dp.K(i, i) / (msqrt[i] * msqrt[i]);
    if (i + 1 < n) t.off[i] = dp.K(i, i + 1) / (msqrt[i] * msqrt[i + 1]);
  }
  double lo = std::numeric_limits<double>::max(), hi = -lo;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = (i > 0 ? std::abs(t.off[i - 1]) : 0.0) + (i + 1 < n ? std::abs(t.off[i]) : 0.0);
    lo = std::min(lo, t.diag[i] - r);
    hi = std::max(hi, t.diag[i] + r);
  }
  const double scale = std::max(std::abs(lo), std::abs(hi));

  OracleEigen out;
  for (std::size_t k = 0; k < count; ++k) {
    double a = lo, b = hi;
    while (b - a > 4 * std::numeric_limits<double>::epsilon() * std::max(scale * 1e-3, std::abs(a) + std::abs(b))) {
      const double mid = 0.5 * (a + b);
      if (mid <= a || mid >= b) break;
      if (detail::sturm_count(t, mid) > k) {
        b = mid;
      } else {
        a = mid;
      }
    }
    const double value = 0.5 * (a + b);
    out.values.push_back(value);

    std::vector<double> y(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) y[i] = 1.0 + 0.01 * static_cast<double>(i % 7);
    for (int it = 0; it < 3; ++it) {
      y = detail::tridiagonal_solve(t, value, y);
      // Earlier vectors: remove their components (matters only for clusters).
      for (const auto& prev : out.vectors) {
        double dot = 0.0;
        for (std::size_t i = 0; i < n; ++i) dot += prev[i] * msqrt[i] * y[i];
        for (std::size_t i = 0; i < n; ++i) y[i] -= dot * prev[i] * msqrt[i];
      }
      double nrm = 0.0;
      for (double v : y) nrm += v * v;
      nrm = std::sqrt(nrm);
      for (double& v : y) v /= nrm;
    }
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = y[i] / msqrt[i];
    out.vectors.push_back(std::move(v));
  }
  return out;
}

/// Eigenvalues on meshes n, 2n, 4n (per side) combined by two levels of
/// Richardson extrapolation for an h^2, h^4 error expansion.
struct RichardsonEigenvalues {
  std::vector<std::vector<double>> levels;  // raw values per mesh
  std::vector<double> extrapolated;
};

inline RichardsonEigenvalues richardson_eigenvalues(const ProblemSpec& spec, std::size_t n_coarse, std::size_t count) {
  RichardsonEigenvalues r;
  for (std::size_t n : {n_coarse, 2 * n_coarse, 4 * n_coarse}) {
    r.levels.push_back(oracle_eigenvalues(discretize(spec, n, n), count).values);
  }
  for (std::size_t k = 0; k < count; ++k) {
    const double r1 = (4.0 * r.levels[1][k] - r.levels[0][k]) / 3.0;
    const double r2 = (4.0 * r.levels[2][k] - r.levels[1][k]) / 3.0;
    r.extrapolated.push_back((16.0 * r2 - r1) / 15.0);
  }
  return r;
}

/// Window [lo, hi] expected to contain the lowest `count` eigenvalues, read
/// off a coarse discretization with generous margins. Problems with
/// sign_class <= 0 have no oracle and get the fixed window [-50, 200].
inline std::pair<double, double> spectrum_window(const ProblemSpec& spec, std::size_t count) {
  if (spec.sign_class() <= 0 || count == 0) return {-50.0, 200.0};
  const std::size_t n = std::max<std::size_t>(64, 4 * count);
  const auto coarse = oracle_eigenvalues(discretize(spec, n, n), count).values;
  const double lo = coarse.front() - 1.0 - 0.1 * std::abs(coarse.front());
  const double hi = 1.3 * coarse.back() + 10.0 + 0.3 * std::abs(coarse.back());
  return {lo, hi};
}

/// Search settings for windows holding many eigenvalues.
inline EigenSearchOptions wide_search_options(std::size_t count, bool allow_non_self_adjoint = false) {
  EigenSearchOptions opt;
  opt.spacing = EigenSearchOptions::Spacing::sqrt;
  opt.n_samples = 300 + 10 * count;
  opt.allow_non_self_adjoint = allow_non_self_adjoint;
  return opt;
}

/// The lowest `count` eigenpairs of a self-adjoint problem.
inline EigenSearch lowest_eigenpairs(const ProblemSpec& spec, std::size_t count) {
  const auto [lo, hi] = spectrum_window(spec, count);
  return find_eigenvalues(spec, lo, hi, count, wide_search_options(count));
}

}  // namespace tsl
