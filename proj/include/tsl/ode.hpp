#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "tsl/error.hpp"
#include "tsl/problem.hpp"

namespace tsl {

using complex = std::complex<double>;

template <class T>
inline constexpr bool is_complex_v = !std::is_same_v<T, double>;

enum class Direction { forward, backward };

/// (u, u') at one abscissa.
template <class T>
struct StatePair {
  T u{};
  T du{};

  friend StatePair operator+(const StatePair& l, const StatePair& r) { return {l.u + r.u, l.du + r.du}; }
  friend StatePair operator-(const StatePair& l, const StatePair& r) { return {l.u - r.u, l.du - r.du}; }
  friend StatePair operator*(T s, const StatePair& p) { return {s * p.u, s * p.du}; }
};

/// Solution of u'' = (q(x) - lambda) u on one closed subinterval, with dense
/// output by quintic Hermite interpolation between accepted integrator steps.
///
/// Knots are stored in ascending x regardless of integration direction, so
/// knots.front() is the state at the lower limit and knots.back() the state
/// at the upper limit (a and c-0 on the left side, c+0 and b on the right).
template <class T>
class Trajectory {
 public:
  struct Knot {
    double x = 0.0;
    StatePair<T> state;
    T ddu{};
  };

  Trajectory() = default;
  Trajectory(Side side, std::vector<Knot> knots) : side_(side), knots_(std::move(knots)) {}

  Side side() const noexcept { return side_; }
  double lower() const { return knots_.front().x; }
  double upper() const { return knots_.back().x; }
  const StatePair<T>& lower_state() const { return knots_.front().state; }
  const StatePair<T>& upper_state() const { return knots_.back().state; }
  const std::vector<Knot>& knots() const noexcept { return knots_; }

  /// Requested sample abscissae (ascending) and the states there.
  const std::vector<double>& grid() const noexcept { return grid_; }
  const std::vector<StatePair<T>>& samples() const noexcept { return samples_; }

  /// Dense output at any x in [lower, upper].
  StatePair<T> at(double x) const {
    const double lo = lower();
    const double hi = upper();
    const double slack = 1e-12 * std::max(1.0, hi - lo);
    if (x < lo - slack || x > hi + slack) {
      throw ConfigError("abscissa " + std::to_string(x) + " outside [" + std::to_string(lo) + ", " +
                        std::to_string(hi) + "]");
    }
    x = std::clamp(x, lo, hi);
    auto it = std::upper_bound(knots_.begin(), knots_.end(), x,
                               [](double v, const Knot& k) { return v < k.x; });
    std::size_t i1 = static_cast<std::size_t>(it - knots_.begin());
    if (i1 == 0) i1 = 1;
    if (i1 >= knots_.size()) i1 = knots_.size() - 1;
    const Knot& k0 = knots_[i1 - 1];
    const Knot& k1 = knots_[i1];
    const double h = k1.x - k0.x;
    if (h == 0.0) return k0.state;
    const double t = (x - k0.x) / h;
    const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;

    const double h0 = 1 - 10 * t3 + 15 * t4 - 6 * t5;
    const double h1 = t - 6 * t3 + 8 * t4 - 3 * t5;
    const double h2 = 0.5 * (t2 - 3 * t3 + 3 * t4 - t5);
    const double h3 = 10 * t3 - 15 * t4 + 6 * t5;
    const double h4 = -4 * t3 + 7 * t4 - 3 * t5;
    const double h5 = 0.5 * (t3 - 2 * t4 + t5);

    const double d0 = -30 * t2 + 60 * t3 - 30 * t4;
    const double d1 = 1 - 18 * t2 + 32 * t3 - 15 * t4;
    const double d2 = 0.5 * (2 * t - 9 * t2 + 12 * t3 - 5 * t4);
    const double d3 = 30 * t2 - 60 * t3 + 30 * t4;
    const double d4 = -12 * t2 + 28 * t3 - 15 * t4;
    const double d5 = 0.5 * (3 * t2 - 8 * t3 + 5 * t4);

    StatePair<T> out;
    out.u = h0 * k0.state.u + (h1 * h) * k0.state.du + (h2 * h * h) * k0.ddu + h3 * k1.state.u +
            (h4 * h) * k1.state.du + (h5 * h * h) * k1.ddu;
    out.du = (d0 / h) * k0.state.u + d1 * k0.state.du + (d2 * h) * k0.ddu + (d3 / h) * k1.state.u +
             d4 * k1.state.du + (d5 * h) * k1.ddu;
    return out;
  }

  /// Multiplies the whole solution by a constant.
  Trajectory scaled(T factor) const {
    Trajectory out = *this;
    for (auto& k : out.knots_) {
      k.state = factor * k.state;
      k.ddu = factor * k.ddu;
    }
    for (auto& s : out.samples_) s = factor * s;
    return out;
  }

  void resample(std::span<const double> grid) {
    grid_.assign(grid.begin(), grid.end());
    samples_.clear();
    samples_.reserve(grid_.size());
    for (std::size_t i = 0; i < grid_.size(); ++i) {
      if (i > 0 && !(grid_[i] > grid_[i - 1])) throw ConfigError("sample grid must be strictly increasing");
      samples_.push_back(at(grid_[i]));
    }
  }

 private:
  Side side_ = Side::left;
  std::vector<Knot> knots_;
  std::vector<double> grid_;
  std::vector<StatePair<T>> samples_;
};

namespace detail {

template <class T>
double magnitude(const T& v) {
  return std::abs(v);
}

template <class T>
bool finite(const T& v) {
  if constexpr (is_complex_v<T>) {
    return std::isfinite(v.real()) && std::isfinite(v.imag());
  } else {
    return std::isfinite(v);
  }
}

// Dormand-Prince 5(4) coefficients.
struct DP5 {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
};

}  // namespace detail

/// Integrates u'' = (q(x) - lambda) u over the whole subinterval of `side`,
/// starting from `init` at its lower limit (forward) or upper limit
/// (backward), and samples the result at `grid` (ascending, inside the
/// subinterval).
///
/// Adaptive Dormand-Prince 5(4): each accepted step keeps its local error
/// estimate below tol * |h| * (1 + |y|) componentwise, i.e. tol per unit
/// length.
template <class T>
Trajectory<T> integrate(const ProblemSpec& spec, T lambda, Side side, Direction direction,
                        StatePair<T> init, std::span<const double> grid, double tol) {
  using K = detail::DP5;
  if (!(tol > 0.0)) throw ConfigError("integration tolerance must be positive");
  if (!detail::finite(init.u) || !detail::finite(init.du)) {
    throw IntegrationError("non-finite initial state");
  }
  const double lo = spec.lower(side);
  const double hi = spec.upper(side);
  const double length = hi - lo;
  if (!(length > 0.0)) throw ConfigError("empty subinterval");

  const double sign = direction == Direction::forward ? 1.0 : -1.0;
  const double x_start = direction == Direction::forward ? lo : hi;
  const double x_end = direction == Direction::forward ? hi : lo;

  auto ddu = [&](double x, const T& u) { return (spec.q(side, x) - lambda) * u; };

  using Knot = typename Trajectory<T>::Knot;
  std::vector<Knot> knots;
  knots.reserve(64);

  double x = x_start;
  StatePair<T> y = init;
  T f_u = y.du;  // (u)' at x
  T f_du = ddu(x, y.u);
  knots.push_back({x, y, f_du});

  const double lam_mag = std::sqrt(detail::magnitude(lambda));
  double h = std::min(length, 0.1 / (1.0 + lam_mag));
  const double h_min = 64 * std::numeric_limits<double>::epsilon() * std::max({std::abs(lo), std::abs(hi), length});
  constexpr std::size_t kMaxSteps = 2'000'000;
  constexpr double kRoundoffFloor = 32 * std::numeric_limits<double>::epsilon();

  for (std::size_t step = 0; (x_end - x) * sign > 0.0; ++step) {
    if (step > kMaxSteps) throw IntegrationError("step limit exceeded at x = " + std::to_string(x));
    bool last = false;
    if ((x + sign * h - x_end) * sign >= 0.0 || (x_end - x) * sign < 1.01 * h) {
      h = (x_end - x) * sign;
      last = true;
    }
    const double hs = sign * h;

    // Stage derivatives: component 0 is u' (= du), component 1 is du' (= (q - lambda) u).
    const T k1u = f_u, k1d = f_du;
    T yu = y.u + hs * (K::a21 * k1u);
    T yd = y.du + hs * (K::a21 * k1d);
    const T k2u = yd, k2d = ddu(x + K::c2 * hs, yu);
    yu = y.u + hs * (K::a31 * k1u + K::a32 * k2u);
    yd = y.du + hs * (K::a31 * k1d + K::a32 * k2d);
    const T k3u = yd, k3d = ddu(x + K::c3 * hs, yu);
    yu = y.u + hs * (K::a41 * k1u + K::a42 * k2u + K::a43 * k3u);
    yd = y.du + hs * (K::a41 * k1d + K::a42 * k2d + K::a43 * k3d);
    const T k4u = yd, k4d = ddu(x + K::c4 * hs, yu);
    yu = y.u + hs * (K::a51 * k1u + K::a52 * k2u + K::a53 * k3u + K::a54 * k4u);
    yd = y.du + hs * (K::a51 * k1d + K::a52 * k2d + K::a53 * k3d + K::a54 * k4d);
    const T k5u = yd, k5d = ddu(x + K::c5 * hs, yu);
    yu = y.u + hs * (K::a61 * k1u + K::a62 * k2u + K::a63 * k3u + K::a64 * k4u + K::a65 * k5u);
    yd = y.du + hs * (K::a61 * k1d + K::a62 * k2d + K::a63 * k3d + K::a64 * k4d + K::a65 * k5d);
    const double x_new = last ? x_end : x + hs;
    const T k6u = yd, k6d = ddu(x + hs, yu);
    StatePair<T> y_new;
    y_new.u = y.u + hs * (K::b1 * k1u + K::b3 * k3u + K::b4 * k4u + K::b5 * k5u + K::b6 * k6u);
    y_new.du = y.du + hs * (K::b1 * k1d + K::b3 * k3d + K::b4 * k4d + K::b5 * k5d + K::b6 * k6d);
    const T k7u = y_new.du, k7d = ddu(x_new, y_new.u);

    const T err_u = hs * (K::e1 * k1u + K::e3 * k3u + K::e4 * k4u + K::e5 * k5u + K::e6 * k6u + K::e7 * k7u);
    const T err_d = hs * (K::e1 * k1d + K::e3 * k3d + K::e4 * k4d + K::e5 * k5d + K::e6 * k6d + K::e7 * k7d);
    // Per unit length, floored at a few ulps so round-off cannot force h to zero.
    const double scale = tol * h + kRoundoffFloor;
    const double sc_u = scale * (1.0 + std::max(detail::magnitude(y.u), detail::magnitude(y_new.u)));
    const double sc_d = scale * (1.0 + std::max(detail::magnitude(y.du), detail::magnitude(y_new.du)));
    const double err = std::max(detail::magnitude(err_u) / sc_u, detail::magnitude(err_d) / sc_d);

    if (!detail::finite(y_new.u) || !detail::finite(y_new.du)) {
      if (h <= h_min) throw IntegrationError("non-finite state at x = " + std::to_string(x));
      h *= 0.25;
      continue;
    }

    if (err <= 1.0) {
      x = x_new;
      y = y_new;
      f_u = k7u;
      f_du = k7d;
      knots.push_back({x, y, f_du});
      const double grow = err == 0.0 ? 5.0 : std::min(5.0, 0.9 * std::pow(err, -0.25));
      h *= std::max(1.0, grow);
    } else {
      h *= std::max(0.2, 0.9 * std::pow(err, -0.25));
      if (h < h_min) throw IntegrationError("step-size underflow at x = " + std::to_string(x));
    }
  }

  if (direction == Direction::backward) std::reverse(knots.begin(), knots.end());
  Trajectory<T> traj(side, std::move(knots));
  traj.resample(grid);
  return traj;
}

/// n equally spaced abscissae covering the closed subinterval of `side`.
inline std::vector<double> uniform_grid(const ProblemSpec& spec, Side side, std::size_t n) {
  if (n < 2) throw ConfigError("a sample grid needs at least 2 points");
  const double lo = spec.lower(side);
  const double hi = spec.upper(side);
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  g.back() = hi;
  return g;
}

}  // namespace tsl
