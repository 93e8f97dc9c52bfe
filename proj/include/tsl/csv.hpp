#pragma once

#include <charconv>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tsl/error.hpp"
#include "tsl/expansion.hpp"
#include "tsl/ode.hpp"
#include "tsl/resolvent.hpp"
#include "tsl/shooting.hpp"
#include "tsl/spectrum.hpp"

namespace tsl::csv {

/// 17 significant digits, '.' separator, independent of the global locale.
inline std::string number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

class Writer {
 public:
  explicit Writer(std::vector<std::string> header) : columns_(header.size()) { line(header); }

  Writer& row(std::initializer_list<double> values) {
    if (values.size() != columns_) throw Error("CSV row width does not match the header");
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(number(v));
    line(cells);
    return *this;
  }

  const std::string& str() const noexcept { return text_; }

 private:
  void line(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) text_ += ',';
      text_ += cells[i];
    }
    text_ += '\n';
  }

  std::size_t columns_;
  std::string text_;
};

inline std::string charfn(const CharFnTrace& trace) {
  Writer w({"lambda", "w"});
  for (std::size_t i = 0; i < trace.size(); ++i) w.row({trace.lambda[i], trace.w[i]});
  return w.str();
}

inline std::string eigenvalues(std::span<const Eigenpair> eigs) {
  Writer w({"n", "lambda", "k_n", "omega_prime", "norm_sq", "psi_beta_prime"});
  for (const auto& e : eigs) {
    w.row({static_cast<double>(e.index), e.lambda, e.k, e.omega_prime, e.norm_sq, e.psi_beta_prime});
  }
  return w.str();
}

/// Both sides in order; x = c appears twice, once per one-sided limit.
template <class T>
std::string solution(const PiecewiseTrajectory<T>& u) {
  Writer w({"x", "re_u", "im_u", "re_du", "im_du"});
  for (Side s : {Side::left, Side::right}) {
    const auto& tr = u.on(s);
    const auto& grid = tr.grid();
    const auto& samples = tr.samples();
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const complex v(samples[i].u), d(samples[i].du);
      w.row({grid[i], v.real(), v.imag(), d.real(), d.imag()});
    }
  }
  return w.str();
}

/// G(x, y) on the product of two abscissa lists; pairs on the diagonal or at c are skipped.
template <class T>
std::string green(const GreenKernel<T>& kernel, std::span<const double> xs, std::span<const double> ys) {
  Writer w({"x", "y", "re_G", "im_G"});
  const double c = kernel.spec().c;
  for (double x : xs) {
    for (double y : ys) {
      if (x == c || y == c) continue;
      const complex g(kernel(x, y));
      w.row({x, y, g.real(), g.imag()});
    }
  }
  return w.str();
}

inline std::string expansion(const ExpansionResult& r) {
  Writer w({"x", "f", "partial_sum", "abs_error"});
  for (const auto& p : r.points) w.row({p.x, p.f, p.partial_sum, p.abs_error});
  return w.str();
}

inline std::string coefficients(std::span<const Eigenpair> eigs, std::span<const double> cn) {
  Writer w({"n", "lambda", "C_n"});
  for (std::size_t i = 0; i < eigs.size() && i < cn.size(); ++i) {
    w.row({static_cast<double>(eigs[i].index), eigs[i].lambda, cn[i]});
  }
  return w.str();
}

inline std::string oracle(std::span<const double> values) {
  Writer w({"n", "lambda_oracle"});
  for (std::size_t i = 0; i < values.size(); ++i) w.row({static_cast<double>(i + 1), values[i]});
  return w.str();
}

}  // namespace tsl::csv
