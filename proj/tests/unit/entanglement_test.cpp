#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <unsupported/Eigen/KroneckerProduct>

#include "micromacro/entanglement.hpp"
#include "micromacro/error.hpp"
#include "oracles.hpp"

using namespace micromacro;

namespace {

ProjectedDensityMatrix wrap(const Eigen::Matrix4cd& m) {
  ProjectedDensityMatrix p;
  p.matrix = m;
  return p;
}

}  // namespace

TEST(Concurrence, BellState) {
  const auto bell = ProjectedDensityMatrix::single_photon_bell();
  const auto c = concurrence_xstate(bell);
  EXPECT_NEAR(c.value, 1.0, 1e-15);
  EXPECT_EQ(c.branch, ConcurrenceBranch::kCoherenceD);
  EXPECT_NEAR(concurrence_general(bell).value, 1.0, 1e-12);
  EXPECT_NEAR(success_probability(bell), 1.0, 1e-15);
}

TEST(Concurrence, ProductStateIsZero) {
  const auto p = ProjectedDensityMatrix::from_x_fields(0.25, 0.25, 0.25, 0.25, 0.0, 0.0);
  EXPECT_EQ(concurrence_xstate(p).value, 0.0);
  EXPECT_EQ(concurrence_xstate(p).branch, ConcurrenceBranch::kZero);
  EXPECT_NEAR(concurrence_general(p).value, 0.0, 1e-12);
}

TEST(Concurrence, WernerClosedForm) {
  // p |Psi+><Psi+| + (1 - p) I/4: C = max(0, (3p - 1)/2).
  for (double p : {0.1, 1.0 / 3.0, 0.5, 0.9}) {
    const auto rho = ProjectedDensityMatrix::from_x_fields((1 - p) / 4, (1 - p) / 4 + p / 2, (1 - p) / 4 + p / 2,
                                                           (1 - p) / 4, p / 2, 0.0);
    EXPECT_NEAR(concurrence_xstate(rho).value, std::max(0.0, (3 * p - 1) / 2), 1e-14);
    EXPECT_NEAR(concurrence_general(rho).value, std::max(0.0, (3 * p - 1) / 2), 1e-10);
  }
}

TEST(Concurrence, DPrimeBranch) {
  const auto rho = ProjectedDensityMatrix::from_x_fields(0.5, 0.0, 0.0, 0.5, 0.0, Complex(0.0, 0.5));
  const auto c = concurrence_xstate(rho);
  EXPECT_NEAR(c.value, 1.0, 1e-15);
  EXPECT_EQ(c.branch, ConcurrenceBranch::kCoherenceDPrime);
}

TEST(Concurrence, ScaleInvariant) {
  const auto a = ProjectedDensityMatrix::from_x_fields(0.1, 0.4, 0.3, 0.2, 0.3, 0.05);
  auto b = a;
  b.matrix *= 0.37;
  EXPECT_NEAR(concurrence_xstate(a).value, concurrence_xstate(b).value, 1e-15);
}

TEST(Concurrence, RoutesAgreeOnRandomXStates) {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 300; ++i) {
    const Eigen::Matrix4cd m = oracle::random_x_state(rng);
    const double ref = oracle::wootters(m);
    EXPECT_NEAR(concurrence_xstate(wrap(m)).value, ref, 1e-9);
    EXPECT_NEAR(concurrence_general(wrap(m)).value, ref, 1e-9);
  }
}

TEST(Concurrence, GeneralRouteOnNonXState) {
  // |Phi> = cos a |00> + sin a |11> rotated by a local unitary stays pure: C = |sin 2a|.
  const double a = 0.4;
  Eigen::Vector4cd psi(std::cos(a), 0.0, 0.0, std::sin(a));
  Eigen::Matrix2cd h;
  h << 1, 1, 1, -1;
  h /= std::sqrt(2.0);
  Eigen::Matrix4cd local = Eigen::kroneckerProduct(h, Eigen::Matrix2cd::Identity());
  psi = local * psi;
  const auto rho = wrap(psi * psi.adjoint());
  EXPECT_GT(rho.off_x_max(), 0.1);
  EXPECT_NEAR(concurrence_general(rho).value, std::abs(std::sin(2 * a)), 1e-10);
  try {
    concurrence_xstate(rho);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNotAnXState);
  }
}

TEST(Concurrence, Errors) {
  try {
    concurrence_xstate(ProjectedDensityMatrix{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kZeroTrace);
  }
  const auto bad = ProjectedDensityMatrix::from_x_fields(0.5, 0.0, 0.5, 0.0, 0.0, 0.4);
  try {
    concurrence_general(bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNonPositive);
  }
}

TEST(ProjectedBlock, XPositions) {
  int count = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) count += is_x_position(i, j);
  EXPECT_EQ(count, 8);
  EXPECT_TRUE(is_x_position(1, 2));
  EXPECT_FALSE(is_x_position(0, 1));
}
