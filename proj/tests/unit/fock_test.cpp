#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "micromacro/error.hpp"
#include "micromacro/fock.hpp"
#include "oracles.hpp"

using namespace micromacro;

namespace {

Eigen::MatrixXcd dense_rho(const std::vector<EntangledBranch>& branches, int dim) {
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(2 * dim, 2 * dim);
  for (const auto& b : branches) {
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(2 * dim);
    for (int n = 0; n < dim; ++n) {
      psi(n) = b.v[n];
      psi(dim + n) = b.u[n];
    }
    rho += b.weight * psi * psi.adjoint();
  }
  return rho;
}

FockAmplitudes random_state(std::mt19937_64& rng, int n_max) {
  std::normal_distribution<double> g;
  FockAmplitudes s = FockAmplitudes::zeros(n_max);
  for (auto& a : s.amps) a = {g(rng), g(rng)};
  const double norm = std::sqrt(s.norm_squared());
  for (auto& a : s.amps) a /= norm;
  return s;
}

}  // namespace

TEST(SqueezedStates, FrozenAmplitudes) {
  const auto s0 = squeezed_vacuum(0.5, 40);
  EXPECT_NEAR(s0[2].real(), -0.307719176458370, 1e-13);
  EXPECT_NEAR(s0[4].real(), 0.123150813854240, 1e-13);
  EXPECT_EQ(s0[1], Complex{});
  EXPECT_NEAR(squeezed_one(0.5, 40)[3].real(), -0.472661382882933, 1e-13);
  EXPECT_NEAR(squeezed_one(1.5, truncation_for(1.5))[5].real(), 0.310935746251163, 1e-13);
}

TEST(SqueezedStates, MatchDenseExponential) {
  for (double r : {0.3, 1.0}) {
    const int dim = 240;
    const Eigen::MatrixXd u = oracle::squeeze_unitary(r, dim);
    const auto s0 = squeezed_vacuum(r, truncation_for(r));
    const auto s1 = squeezed_one(r, truncation_for(r));
    ASSERT_EQ(s0.n_max(), s1.n_max());
    for (int n = 0; n <= s0.n_max(); ++n) {
      EXPECT_NEAR(s0[n].real(), u(n, 0), 1e-12) << "r=" << r << " n=" << n;
      EXPECT_NEAR(s1[n].real(), u(n, 1), 1e-12) << "r=" << r << " n=" << n;
    }
  }
}

TEST(SqueezedStates, NormsAndParity) {
  for (double r : {0.0, 0.7, 2.6515}) {
    const int cut = truncation_for(r);
    const auto s0 = squeezed_vacuum(r, cut);
    const auto s1 = squeezed_one(r, cut);
    EXPECT_NEAR(s0.norm_squared(), 1.0, 1e-10);
    EXPECT_NEAR(s1.norm_squared(), 1.0, 1e-10);
    for (int n = 1; n <= cut; n += 2) EXPECT_EQ(s0[n], Complex{});
    for (int n = 0; n <= cut; n += 2) EXPECT_EQ(s1[n], Complex{});
  }
}

TEST(SqueezedStates, TailBoundsAreUpperBounds) {
  const double r = 1.2;
  const auto s0 = squeezed_vacuum(r, 400);
  for (int cut : {10, 40, 80}) {
    double tail = 0.0;
    for (int n = cut + 1; n <= 400; ++n) tail += std::norm(s0[n]);
    EXPECT_LE(tail, squeezed_vacuum_tail(r, cut) * (1 + 1e-12));
  }
}

TEST(SqueezedStates, TruncationTooSmallThrows) {
  try {
    squeezed_vacuum(2.6, 10);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kTruncationInsufficient);
  }
}

TEST(ApplySqueeze, MatchesDenseExponentialOnRandomState) {
  std::mt19937_64 rng(3);
  const auto psi = random_state(rng, 8);
  const double r = 0.8;
  const Eigen::MatrixXd u = oracle::squeeze_unitary(r, 200);
  SqueezeOptions opt;
  opt.tail_tol = 1e-16;
  const auto out = apply_squeeze(psi, {r, +1}, opt);
  for (int n = 0; n < 60; ++n) {
    Complex ref = 0.0;
    for (int k = 0; k <= 8; ++k) ref += u(n, k) * psi[k];
    EXPECT_NEAR(std::abs(out[n] - ref), 0.0, 1e-10) << n;
  }
}

TEST(ApplySqueeze, RoundTrip) {
  std::mt19937_64 rng(11);
  for (double r : {0.4, 1.5, 2.0}) {
    const auto psi = random_state(rng, 12);
    SqueezeOptions opt;
    opt.tail_tol = 1e-14;
    const auto fwd = apply_squeeze(psi, {r, +1}, opt);
    opt.out_size = 13;
    const auto back = apply_squeeze(fwd, {r, -1}, opt);
    for (int n = 0; n <= 12; ++n) EXPECT_NEAR(std::abs(back[n] - psi[n]), 0.0, 1e-8) << "r=" << r << " n=" << n;
  }
}

TEST(ApplySqueeze, RejectsNegativeR) {
  EXPECT_THROW(apply_squeeze(FockAmplitudes::number_state(0, 4), {-0.5, +1}), Error);
}

TEST(Loss, MatchesDenseChannel) {
  std::mt19937_64 rng(5);
  const int dim = 12;
  EntangledBranch b{1.0, random_state(rng, dim - 1), random_state(rng, dim - 1)};
  const double norm = b.trace();
  b.weight = 1.0 / norm;
  const auto out = loss_on_branch(b, {0.7, -1, 1e-16});
  const Eigen::MatrixXcd got = dense_rho(out.branches, dim);
  oracle::TwoModeState ref;
  ref.dim = dim;
  ref.rho = dense_rho({b}, dim);
  ref.loss_b(0.7);
  EXPECT_LT((got - ref.rho).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(ensemble_trace(out.branches), 1.0, 1e-12);
}

TEST(Loss, Semigroup) {
  std::mt19937_64 rng(7);
  const int dim = 16;
  const EntangledBranch b{1.0, random_state(rng, dim - 1), random_state(rng, dim - 1)};
  for (auto [ea, eb] : {std::pair{0.9, 0.8}, std::pair{0.5, 0.99}, std::pair{0.3, 0.3}}) {
    std::vector<EntangledBranch> two;
    for (const auto& x : loss_on_branch(b, {ea, -1, 1e-18}).branches) {
      const auto y = loss_on_branch(x, {eb, -1, 1e-18}).branches;
      two.insert(two.end(), y.begin(), y.end());
    }
    const auto one = loss_on_branch(b, {ea * eb, -1, 1e-18}).branches;
    EXPECT_LT((dense_rho(two, dim) - dense_rho(one, dim)).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Loss, VacuumIsFixedPoint) {
  const EntangledBranch vac{1.0, FockAmplitudes::zeros(0), FockAmplitudes::number_state(0, 0)};
  for (double eta : {0.0, 0.3, 1.0}) {
    const auto out = loss_on_branch(vac, {eta});
    const auto p = branches_to_projected(out.branches);
    EXPECT_NEAR(p.p00(), 1.0, 1e-12);
    EXPECT_NEAR(ensemble_trace(out.branches), 1.0, 1e-12);
  }
}

TEST(Loss, ModeADampsSinglePhoton) {
  const EntangledBranch b{1.0, FockAmplitudes::number_state(0, 1), FockAmplitudes::number_state(1, 1)};
  const auto p = branches_to_projected(loss_on_mode_a(b, 0.64));
  EXPECT_NEAR(p.p10(), 0.64, 1e-15);
  EXPECT_NEAR(p.p00(), 0.36, 1e-15);
  EXPECT_NEAR(p.d().real(), 0.8, 1e-15);
}

TEST(Loss, InvalidEta) {
  const EntangledBranch b{1.0, FockAmplitudes::number_state(0, 1), FockAmplitudes::number_state(1, 1)};
  try {
    loss_on_branch(b, {1.5});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidEta);
  }
}

TEST(Branches, PruneReportsRemovedTrace) {
  std::vector<EntangledBranch> v{{1.0, FockAmplitudes::number_state(0, 0), FockAmplitudes::zeros(0)},
                                 {1e-16, FockAmplitudes::number_state(0, 0), FockAmplitudes::zeros(0)}};
  EXPECT_NEAR(prune_branches(v, 1e-14), 1e-16, 1e-30);
  EXPECT_EQ(v.size(), 1u);
}
