#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "support.hpp"
#include "tsl/expansion.hpp"
#include "tsl/oracle.hpp"

using namespace tsl;
using tsl::testing::load;

namespace {

PiecewiseExpression pw(const char* left, const char* right) {
  return {parse_expression(left), parse_expression(right)};
}

const std::vector<Eigenpair>& cont_eigs() {
  static const auto e = lowest_eigenpairs(load("p_cont"), 40).eigenpairs;
  return e;
}

const std::vector<Eigenpair>& trans_eigs() {
  static const auto e = lowest_eigenpairs(load("p_trans"), 40).eigenpairs;
  return e;
}

std::span<const Eigenpair> first(const std::vector<Eigenpair>& eigs, std::size_t n) { return {eigs.data(), n}; }

// F = (f, (f)'_beta) from check_domain.
H1Element<double> member(const ProblemSpec& spec, const PiecewiseExpression& f) {
  const auto d = check_domain(spec, f);
  EXPECT_TRUE(d.member);
  return H1Element<double>::from_expressions(f, d.f2);
}

}  // namespace

TEST(Expansion, FortyEigenpairsAvailable) {
  ASSERT_EQ(cont_eigs().size(), 40u);
  ASSERT_EQ(trans_eigs().size(), 40u);
  const auto expect = tsl::testing::cont_eigenvalues(40);
  for (std::size_t i = 0; i < 40; ++i) EXPECT_LE(tsl::testing::rel(cont_eigs()[i].lambda, expect[i]), 1e-9);
}

TEST(Expansion, CoefficientsOfEigenElements) {
  const auto spec = load("p_trans");
  const auto& eigs = trans_eigs();
  for (std::size_t m : {0u, 3u, 17u}) {
    const auto F = eigs[m].element();
    for (std::size_t n = 0; n < 25; ++n) {
      const double cn = fourier_coefficient(spec, F, eigs[n]);
      EXPECT_NEAR(cn, n == m ? 1.0 : 0.0, 1e-7) << m << " " << n;
    }
  }
}

TEST(Expansion, CoefficientOfScalarElement) {
  const auto spec = load("p_trans");
  const double s = 0.8;
  const auto F = H1Element<double>::from_expressions(pw("0", "0"), s);
  for (std::size_t n = 0; n < 5; ++n) {
    const auto& e = trans_eigs()[n];
    EXPECT_NEAR(fourier_coefficient(spec, F, e), spec.delta_product() / spec.rho() * s * e.psi_beta_prime, 1e-14);
  }
}

TEST(Expansion, CoefficientsStableUnderQuadratureRefinement) {
  const auto spec = load("p_cont");
  const auto F = H1Element<double>::from_expressions(pw("sin(pi*x)", "sin(pi*x)"), 0.0);
  QuadratureOptions fine;
  fine.initial_panels = 64;
  fine.abs_tol = fine.rel_tol = 1e-13;
  for (std::size_t n = 0; n < 10; ++n) {
    const auto& e = cont_eigs()[n];
    EXPECT_NEAR(fourier_coefficient(spec, F, e), fourier_coefficient(spec, F, e, fine), 1e-7);
  }
}

TEST(Expansion, DomainMembership) {
  const auto cont = load("p_cont");
  const auto eig = check_domain(cont, pw("sin(0.8603335890*x)", "sin(0.8603335890*x)"));
  EXPECT_TRUE(eig.member);
  EXPECT_TRUE(eig.left_smooth && eig.right_smooth);

  const auto one = check_domain(cont, pw("1", "1"));
  EXPECT_FALSE(one.member);
  EXPECT_NEAR(one.bc_a_residual, 1.0, 1e-12);

  const auto trans = load("p_trans");
  const auto lin = check_domain(trans, pw("x + 1", "2 + x/2"));
  EXPECT_TRUE(lin.member);
  EXPECT_LE(lin.transmission_residuals[0], 1e-8);
  EXPECT_LE(lin.transmission_residuals[1], 1e-8);
  // (f)'_beta = beta1p f(1) - beta2p f'(1) = 2.5.
  EXPECT_NEAR(lin.f2, 2.5, 1e-9);

  const auto jump = check_domain(trans, pw("x + 1", "1 + x/2"));
  EXPECT_FALSE(jump.member);
  EXPECT_GT(jump.transmission_residuals[0], 0.1);

  const auto kink = check_domain(trans, pw("x + 1", "2 + x"));
  EXPECT_FALSE(kink.member);
  EXPECT_GT(kink.transmission_residuals[1], 0.1);

  const auto singular = check_domain(cont, pw("1/(x - 0.25)", "0"));
  EXPECT_FALSE(singular.left_smooth);
  EXPECT_FALSE(singular.member);
}

TEST(Expansion, ReproducesEigenfunction) {
  const auto spec = load("p_trans");
  for (std::size_t n : {1u, 5u, 40u}) {
    const auto r = expand(spec, trans_eigs()[0].element(), first(trans_eigs(), n), expansion_grid(spec));
    EXPECT_LE(r.max_error, 1e-7) << n;
    ASSERT_EQ(r.coefficients.size(), n);
    EXPECT_NEAR(r.coefficients[0], 1.0, 1e-8);
    for (std::size_t k = 1; k < n; ++k) EXPECT_LE(std::abs(r.coefficients[k]), 1e-7);
  }
}

TEST(Expansion, UniformConvergenceForDomainMember) {
  const auto spec = load("p_trans");
  const auto F = member(spec, pw("x + 1", "2 + x/2"));
  const auto grid = expansion_grid(spec);
  const auto r10 = expand(spec, F, first(trans_eigs(), 10), grid);
  const auto r40 = expand(spec, F, first(trans_eigs(), 40), grid);
  EXPECT_LT(r40.max_error, r10.max_error);
  EXPECT_LT(r40.max_error, 1e-3);
}

TEST(Expansion, EnergyDefectContinuousLimit) {
  const auto spec = load("p_cont");
  const auto F = member(spec, pw("x", "x"));
  const auto r = expand(spec, F, first(cont_eigs(), 40), expansion_grid(spec));
  EXPECT_LE(r.parseval_defect, 1e-3);
}

TEST(Expansion, EnergyDefectMonotoneForMembers) {
  const auto cont = load("p_cont");
  const auto trans = load("p_trans");
  struct Case {
    const ProblemSpec* spec;
    const std::vector<Eigenpair>* eigs;
    PiecewiseExpression f;
  };
  for (const auto& c : {Case{&cont, &cont_eigs(), pw("x", "x")}, Case{&cont, &cont_eigs(), pw("x - x^3", "x - x^3")},
                        Case{&trans, &trans_eigs(), pw("x + 1", "2 + x/2")}}) {
    const auto F = member(*c.spec, c.f);
    double prev = INFINITY;
    for (std::size_t n : {5u, 10u, 20u, 40u}) {
      const double d = expand(*c.spec, F, first(*c.eigs, n), expansion_grid(*c.spec, 21)).parseval_defect;
      EXPECT_LE(d, prev + 1e-9) << n;
      prev = d;
    }
  }
}

TEST(Expansion, BesselInequality) {
  const auto spec = load("p_trans");
  const std::vector<H1Element<double>> data = {
      H1Element<double>::from_expressions(pw("1", "1"), 0.0),
      H1Element<double>::from_expressions(pw("exp(x)", "cos(5*x)"), -2.0),
      H1Element<double>::from_expressions(pw("abs(x + 0.5)", "0"), 1.0)};
  for (const auto& F : data) {
    const double total = inner_product(spec, F, F);
    double sum = 0.0;
    for (const auto& e : trans_eigs()) {
      const double cn = fourier_coefficient(spec, F, e);
      sum += cn * cn;
      EXPECT_LE(sum, total * (1 + 1e-9));
    }
  }
}

TEST(Expansion, DifferentiatedSeriesImproves) {
  const auto spec = load("p_trans");
  const auto f = pw("x + 1", "2 + x/2");
  const auto F = member(spec, f);
  const auto grid = expansion_grid(spec, 41);
  const auto r40 = expand(spec, F, first(trans_eigs(), 40), grid);
  const auto e10 = differentiated_max_error(spec, f, std::span(r40.coefficients).first(10), first(trans_eigs(), 10), grid);
  const auto e40 = differentiated_max_error(spec, f, r40.coefficients, first(trans_eigs(), 40), grid);
  EXPECT_LT(e40, e10);
}

TEST(Expansion, ParsevalDefectZeroFunction) {
  EXPECT_EQ(parseval_defect(load("p_cont"), pw("0", "0"), first(cont_eigs(), 5)), 0.0);
}

TEST(Expansion, ParsevalDefectOfEigenfunctionIsBoundaryShare) {
  // For (psi_1, 0): ||F||^2 = C_1 = 1 - s with s = (d1 d2 / rho) ((psi_1)'_beta)^2, so the defect at N = 1 is s.
  const auto spec = load("p_trans");
  const auto& e1 = trans_eigs()[0];
  const double share = spec.delta_product() / spec.rho() * e1.psi_beta_prime * e1.psi_beta_prime;
  auto defect = [&](std::size_t n) {
    const auto F = H1Element<double>::from_trajectory(e1.psi, 0.0);
    const double lhs = inner_product(spec, F, F);
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double ck = inner_product(spec, F, trans_eigs()[k].element());
      sum += ck * ck;
    }
    return std::abs(lhs - sum) / lhs;
  };
  EXPECT_NEAR(defect(1), share, 1e-5);
  double prev = defect(1);
  for (std::size_t n : {5u, 20u, 40u}) {
    const double d = defect(n);
    EXPECT_LT(d, prev);
    prev = d;
  }
}

TEST(Expansion, ParsevalDefectTrendForSine) {
  const auto spec = load("p_cont");
  const auto f = pw("sin(pi*x)", "sin(pi*x)");
  double prev = INFINITY;
  for (std::size_t n : {5u, 10u, 20u, 40u}) {
    const double d = parseval_defect(spec, f, first(cont_eigs(), n));
    EXPECT_GT(d, 0.0);
    EXPECT_LT(d, prev) << n;
    prev = d;
  }
}

TEST(Expansion, GridAvoidsInterface) {
  const auto spec = load("p_cont");
  const auto g = expansion_grid(spec);
  EXPECT_LT(g.left.back(), spec.c);
  EXPECT_GT(g.right.front(), spec.c);
  EXPECT_NEAR(g.left.back(), spec.c, 2e-9);
}

TEST(Expansion, RequiresEigenpairs) {
  const auto spec = load("p_cont");
  EXPECT_THROW(expand(spec, H1Element<double>{}, {}, expansion_grid(spec)), ConfigError);
}
