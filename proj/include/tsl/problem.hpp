#pragma once

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tsl/error.hpp"
#include "tsl/expression.hpp"

namespace tsl {

/// Which side of the transmission point c: [a, c) or (c, b].
enum class Side { left, right };

/// Sturm-Liouville problem on [a, c) U (c, b]:
///
///     -u'' + q(x) u = lambda u
///     alpha1 u(a) + alpha2 u'(a) = 0
///     (beta1p lambda + beta1) u(b) - (beta2p lambda + beta2) u'(b) = 0
///     gamma1 u(c-0) = delta1 u(c+0),   gamma2 u'(c-0) = delta2 u'(c+0)
///
/// q may jump at c, so it is given separately on each side.
struct ProblemSpec {
  double a = 0.0;
  double c = 0.5;
  double b = 1.0;
  Expression q_left;
  Expression q_right;
  double alpha1 = 1.0;
  double alpha2 = 0.0;
  double beta1 = 0.0;
  double beta2 = 1.0;
  double beta1p = 1.0;
  double beta2p = 0.0;
  double gamma1 = 1.0;
  double gamma2 = 1.0;
  double delta1 = 1.0;
  double delta2 = 1.0;

  double rho() const noexcept { return beta1p * beta2 - beta1 * beta2p; }
  double gamma_product() const noexcept { return gamma1 * gamma2; }
  double delta_product() const noexcept { return delta1 * delta2; }

  /// Sign of gamma1 gamma2 delta1 delta2: +1, -1 or 0.
  int sign_class() const noexcept {
    const double p = gamma_product() * delta_product();
    return (p > 0.0) - (p < 0.0);
  }

  double lower(Side s) const noexcept { return s == Side::left ? a : c; }
  double upper(Side s) const noexcept { return s == Side::left ? c : b; }

  double q(Side s, double x) const { return s == Side::left ? q_left(x) : q_right(x); }

  /// Weight of the side in the modified inner product, |gamma1 gamma2| or |delta1 delta2|.
  double weight(Side s) const noexcept {
    return std::abs(s == Side::left ? gamma_product() : delta_product());
  }
  /// Weight of the scalar component, |delta1 delta2| / rho.
  double scalar_weight() const noexcept { return std::abs(delta_product()) / rho(); }
};

struct ValidationEntry {
  enum class Severity { error, warning };
  Severity severity = Severity::error;
  std::string code;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationEntry> entries;
  bool pass = true;
  int sign_class = 0;
  bool self_adjoint = false;

  bool has(std::string_view code) const {
    for (const auto& e : entries) {
      if (e.code == code) return true;
    }
    return false;
  }
};

inline bool operator==(const ValidationEntry& l, const ValidationEntry& r) {
  return l.severity == r.severity && l.code == r.code && l.message == r.message;
}

inline bool operator==(const ValidationReport& l, const ValidationReport& r) {
  return l.entries == r.entries && l.pass == r.pass && l.sign_class == r.sign_class &&
         l.self_adjoint == r.self_adjoint;
}

namespace detail {

inline constexpr int kValidationSamples = 101;

// Returns an empty string when expr is finite at kValidationSamples points
// of [lo, hi], otherwise the first failure.
inline std::string check_finite_on(const Expression& expr, double lo, double hi) {
  for (int i = 0; i < kValidationSamples; ++i) {
    const double x = lo + (hi - lo) * i / (kValidationSamples - 1);
    try {
      const double v = expr(x);
      if (!std::isfinite(v)) return "non-finite value at x = " + std::to_string(x);
    } catch (const DomainError& e) {
      return e.what();
    }
  }
  return {};
}

}  // namespace detail

/// Checks every structural invariant of the problem. Violations are reported
/// as entries rather than thrown.
inline ValidationReport validate(const ProblemSpec& spec) {
  ValidationReport report;
  auto error = [&](std::string code, std::string message) {
    report.entries.push_back({ValidationEntry::Severity::error, std::move(code), std::move(message)});
  };
  auto warning = [&](std::string code, std::string message) {
    report.entries.push_back({ValidationEntry::Severity::warning, std::move(code), std::move(message)});
  };

  const bool finite = std::isfinite(spec.a) && std::isfinite(spec.b) && std::isfinite(spec.c) &&
                      std::isfinite(spec.alpha1) && std::isfinite(spec.alpha2) &&
                      std::isfinite(spec.beta1) && std::isfinite(spec.beta2) &&
                      std::isfinite(spec.beta1p) && std::isfinite(spec.beta2p) &&
                      std::isfinite(spec.gamma1) && std::isfinite(spec.gamma2) &&
                      std::isfinite(spec.delta1) && std::isfinite(spec.delta2);
  if (!finite) error("non_finite", "all numeric fields must be finite");

  const bool ordered = spec.a < spec.c && spec.c < spec.b;
  if (!ordered) error("interval", "interval must satisfy a < c < b");
  if (spec.alpha1 == 0.0 && spec.alpha2 == 0.0) {
    error("bc_a_trivial", "boundary condition at a is trivial: alpha1 = alpha2 = 0");
  }
  if (spec.beta1 == 0.0 && spec.beta2 == 0.0 && spec.beta1p == 0.0 && spec.beta2p == 0.0) {
    error("bc_b_trivial", "boundary condition at b is trivial: all beta coefficients are 0");
  }
  if (spec.gamma_product() == 0.0) error("gamma_zero", "gamma1 * gamma2 must be nonzero");
  if (spec.delta_product() == 0.0) error("delta_zero", "delta1 * delta2 must be nonzero");
  if (!(spec.rho() > 0.0)) {
    error("rho", "rho = beta1p*beta2 - beta1*beta2p must be positive, got " +
                     std::to_string(spec.rho()));
  }
  if (ordered) {
    if (auto msg = detail::check_finite_on(spec.q_left, spec.a, spec.c); !msg.empty()) {
      error("q_left", "left potential: " + msg);
    }
    if (auto msg = detail::check_finite_on(spec.q_right, spec.c, spec.b); !msg.empty()) {
      error("q_right", "right potential: " + msg);
    }
  }

  report.sign_class = spec.sign_class();
  report.self_adjoint = report.sign_class > 0;
  if (report.sign_class < 0) {
    warning("sign_class", "non-self-adjoint sign class; spectrum may be empty");
  }
  for (const auto& e : report.entries) {
    if (e.severity == ValidationEntry::Severity::error) report.pass = false;
  }
  return report;
}

/// Throws ConfigError listing the errors of validate(spec), if any.
inline void require_valid(const ProblemSpec& spec) {
  const auto report = validate(spec);
  if (report.pass) return;
  std::string msg = "invalid problem:";
  for (const auto& e : report.entries) {
    if (e.severity == ValidationEntry::Severity::error) msg += " [" + e.code + "] " + e.message + ";";
  }
  throw ConfigError(msg);
}

namespace detail {

inline double json_number(const nlohmann::json& obj, const char* section, const char* key) {
  if (!obj.contains(key)) {
    throw ConfigError(std::string("missing field ") + section + "." + key);
  }
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(std::string(section) + "." + key + " must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(std::string(section) + "." + key + " must be finite");
  return d;
}

inline const nlohmann::json& json_section(const nlohmann::json& root, const char* section) {
  if (!root.contains(section) || !root.at(section).is_object()) {
    throw ConfigError(std::string("missing object '") + section + "'");
  }
  return root.at(section);
}

inline Expression json_expression(const nlohmann::json& obj, const char* key) {
  if (!obj.contains(key) || !obj.at(key).is_string()) {
    throw ConfigError(std::string("potential.") + key + " must be an expression string");
  }
  try {
    return Expression::parse(obj.at(key).get<std::string>());
  } catch (const ParseError& e) {
    throw e.in(std::string("potential.") + key);
  }
}

}  // namespace detail

/// Parses a problem from JSON text:
///
///     {"interval": {"a":..., "c":..., "b":...},
///      "potential": {"left": "<expr>", "right": "<expr>"},
///      "bc_a": {"alpha1":..., "alpha2":...},
///      "bc_b": {"beta1":..., "beta2":..., "beta1p":..., "beta2p":...},
///      "transmission": {"gamma1":..., "gamma2":..., "delta1":..., "delta2":...}}
///
/// Only the schema is enforced here; use validate() for the problem invariants.
inline ProblemSpec load_problem(std::string_view config_text) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(config_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("problem file must be a JSON object");

  ProblemSpec spec;
  const auto& interval = detail::json_section(root, "interval");
  spec.a = detail::json_number(interval, "interval", "a");
  spec.c = detail::json_number(interval, "interval", "c");
  spec.b = detail::json_number(interval, "interval", "b");

  const auto& potential = detail::json_section(root, "potential");
  spec.q_left = detail::json_expression(potential, "left");
  spec.q_right = detail::json_expression(potential, "right");

  const auto& bc_a = detail::json_section(root, "bc_a");
  spec.alpha1 = detail::json_number(bc_a, "bc_a", "alpha1");
  spec.alpha2 = detail::json_number(bc_a, "bc_a", "alpha2");

  const auto& bc_b = detail::json_section(root, "bc_b");
  spec.beta1 = detail::json_number(bc_b, "bc_b", "beta1");
  spec.beta2 = detail::json_number(bc_b, "bc_b", "beta2");
  spec.beta1p = detail::json_number(bc_b, "bc_b", "beta1p");
  spec.beta2p = detail::json_number(bc_b, "bc_b", "beta2p");

  const auto& tr = detail::json_section(root, "transmission");
  spec.gamma1 = detail::json_number(tr, "transmission", "gamma1");
  spec.gamma2 = detail::json_number(tr, "transmission", "gamma2");
  spec.delta1 = detail::json_number(tr, "transmission", "delta1");
  spec.delta2 = detail::json_number(tr, "transmission", "delta2");
  return spec;
}

/// A function given by one expression on each side of c.
struct PiecewiseExpression {
  Expression left;
  Expression right;

  double operator()(Side s, double x) const { return s == Side::left ? left(x) : right(x); }
};

/// Canonical one-line rendering of every field; identical specs give
/// identical strings.
inline std::string fingerprint(const ProblemSpec& spec) {
  std::string out;
  auto num = [&](const char* key, double v) {
    out += key;
    out += '=';
    out += detail::format_double(v);
    out += ';';
  };
  num("a", spec.a);
  num("c", spec.c);
  num("b", spec.b);
  out += "q_left=" + spec.q_left.to_string() + ";q_right=" + spec.q_right.to_string() + ";";
  num("alpha1", spec.alpha1);
  num("alpha2", spec.alpha2);
  num("beta1", spec.beta1);
  num("beta2", spec.beta2);
  num("beta1p", spec.beta1p);
  num("beta2p", spec.beta2p);
  num("gamma1", spec.gamma1);
  num("gamma2", spec.gamma2);
  num("delta1", spec.delta1);
  num("delta2", spec.delta2);
  return out;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline ProblemSpec load_problem_file(const std::string& path) {
  return load_problem(read_text_file(path));
}

}  // namespace tsl
