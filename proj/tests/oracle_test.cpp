#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"
#include "tsl/oracle.hpp"
#include "tsl/spectrum.hpp"

using namespace tsl;
using tsl::testing::load;
using tsl::testing::rel;

namespace {

// Robin end at a, lambda-dependent end at b and an unequal transmission
// ratio: every optional unknown of the pencil is present.
ProblemSpec full_spec() {
  auto spec = load("p_trans");
  spec.q_left = parse_expression("1 + x^2");
  spec.q_right = parse_expression("exp(x)");
  spec.alpha1 = 1.0;
  spec.alpha2 = 0.5;
  spec.beta1 = -1.0;
  spec.beta2 = 1.0;
  spec.beta1p = 1.0;
  spec.beta2p = 0.25;
  return spec;
}

void expect_symmetric(const SymmetricMatrix& A) {
  for (std::size_t i = 0; i < A.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) ASSERT_EQ(A(i, j), A(j, i)) << i << " " << j;
  }
}

}  // namespace

TEST(Oracle, MatricesSymmetricAndMassPositive) {
  for (const auto& spec : {load("p_cont"), load("p_trans"), full_spec()}) {
    const auto dp = discretize(spec, 16, 24);
    expect_symmetric(dp.K);
    expect_symmetric(dp.M);
    for (double d : ldlt_pivots(dp.M)) EXPECT_GT(d, 0.0);
  }
}

TEST(Oracle, Dimension) {
  // Dirichlet at a and beta2p = 0: interior nodes, one interface value and u(b).
  EXPECT_EQ(discretize(load("p_cont"), 16, 24).dimension(), 40u);
  const auto dp = discretize(full_spec(), 16, 24);
  EXPECT_TRUE(dp.has_u_a);
  EXPECT_TRUE(dp.has_boundary_unknown);
  EXPECT_EQ(dp.dimension(), 42u);
}

TEST(Oracle, ConvergesToContinuousRoots) {
  const auto expect = tsl::testing::cont_eigenvalues(5);
  const auto got = oracle_eigenvalues(discretize(load("p_cont"), 256, 256), 5).values;
  for (std::size_t k = 0; k < 5; ++k) EXPECT_LE(rel(got[k], expect[k]), 1e-3) << k;
}

TEST(Oracle, SecondOrderConvergence) {
  const auto spec = load("p_trans");
  const auto expect = tsl::testing::trans_eigenvalues(3);
  const auto coarse = oracle_eigenvalues(discretize(spec, 32, 32), 3).values;
  const auto fine = oracle_eigenvalues(discretize(spec, 64, 64), 3).values;
  for (std::size_t k = 0; k < 3; ++k) {
    const double ratio = (coarse[k] - expect[k]) / (fine[k] - expect[k]);
    EXPECT_GE(ratio, 3.0) << k;
    EXPECT_LE(ratio, 5.0) << k;
  }
}

TEST(Oracle, RichardsonAgreesWithClosedForms) {
  const auto cont = richardson_eigenvalues(load("p_cont"), 64, 3).extrapolated;
  const auto cont_expect = tsl::testing::cont_eigenvalues(3);
  const auto trans = richardson_eigenvalues(load("p_trans"), 64, 3).extrapolated;
  const auto trans_expect = tsl::testing::trans_eigenvalues(3);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_LE(rel(cont[k], cont_expect[k]), 1e-5) << k;
    EXPECT_LE(rel(trans[k], trans_expect[k]), 1e-5) << k;
  }
}

TEST(Oracle, RichardsonAgreesWithShootingOnGeneralProblem) {
  const auto spec = full_spec();
  const auto rich = richardson_eigenvalues(spec, 64, 4).extrapolated;
  const auto [lo, hi] = spectrum_window(spec, 4);
  const auto shot = find_eigenvalues(spec, lo, hi, 4).eigenpairs;
  ASSERT_EQ(shot.size(), 4u);
  for (std::size_t k = 0; k < 4; ++k) EXPECT_LE(rel(rich[k], shot[k].lambda), 1e-5) << k;
}

TEST(Oracle, EigenvectorsMOrthonormal) {
  const auto dp = discretize(full_spec(), 64, 64);
  const auto eig = oracle_eigenvalues(dp, 6);
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double m = 0.0;
      for (std::size_t k = 0; k < dp.dimension(); ++k) m += eig.vectors[i][k] * dp.M(k, k) * eig.vectors[j][k];
      EXPECT_NEAR(m, i == j ? 1.0 : 0.0, 1e-8) << i << " " << j;
    }
  }
}

TEST(Oracle, EigenvectorResidual) {
  const auto dp = discretize(load("p_trans"), 32, 32);
  const auto eig = oracle_eigenvalues(dp, 3);
  const std::size_t n = dp.dimension();
  for (std::size_t e = 0; e < 3; ++e) {
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double r = -eig.values[e] * dp.M(i, i) * eig.vectors[e][i];
      for (std::size_t j = 0; j < n; ++j) r += dp.K(i, j) * eig.vectors[e][j];
      worst = std::max(worst, std::abs(r));
    }
    EXPECT_LE(worst, 1e-8 * std::abs(eig.values[e]));
  }
}

TEST(Oracle, ValuesAscending) {
  const auto v = oracle_eigenvalues(discretize(full_spec(), 32, 32), 10).values;
  for (std::size_t k = 1; k < v.size(); ++k) EXPECT_LT(v[k - 1], v[k]);
}

TEST(Oracle, PivotsDetectIndefinite) {
  SymmetricMatrix A(2);
  A.add(0, 0, 1.0);
  A.add(1, 1, -2.0);
  const auto p = ldlt_pivots(A);
  EXPECT_EQ(p[0], 1.0);
  EXPECT_EQ(p[1], -2.0);
}

TEST(Oracle, RefusesUnsupportedInput) {
  EXPECT_THROW(discretize(load("p_cex"), 64, 64), ConfigError);
  EXPECT_THROW(discretize(load("p_cont"), 7, 64), ConfigError);
  EXPECT_THROW(oracle_eigenvalues(discretize(load("p_cont"), 8, 8), 17), ConfigError);
}

TEST(Oracle, WindowContainsRequestedEigenvalues) {
  const auto expect = tsl::testing::cont_eigenvalues(20);
  const auto [lo, hi] = spectrum_window(load("p_cont"), 20);
  EXPECT_LT(lo, expect.front());
  EXPECT_GT(hi, expect.back());
  const auto fixed = spectrum_window(load("p_cex"), 20);
  EXPECT_EQ(fixed.first, -50.0);
  EXPECT_EQ(fixed.second, 200.0);
}
