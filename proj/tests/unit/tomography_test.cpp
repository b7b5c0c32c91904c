#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "micromacro/error.hpp"
#include "micromacro/pattern_functions.hpp"
#include "micromacro/pipeline.hpp"
#include "micromacro/tomography.hpp"
#include "oracles.hpp"

using namespace micromacro;

namespace {

double hermite_ref(int n, double x) {
  // psi_n(x) for vacuum variance 1/2: H_n(x) exp(-x^2/2) / sqrt(2^n n! sqrt(pi)).
  double h0 = 1.0, h1 = 2.0 * x;
  double h = n == 0 ? h0 : h1;
  for (int k = 2; k <= n; ++k) {
    h = 2.0 * x * h1 - 2.0 * (k - 1) * h0;
    h0 = h1;
    h1 = h;
  }
  return h * std::exp(-x * x / 2) / std::sqrt(std::pow(2.0, n) * std::tgamma(n + 1.0) * std::sqrt(M_PI));
}

ExperimentConfig tomo_config() {
  ExperimentConfig c;
  c.r = 1.0;
  c.eta = 0.95;
  return c;
}

}  // namespace

TEST(PatternFunctions, Dawson) {
  // sqrt(pi)/2 exp(-x^2) erfi(x) at 25 digits (mpmath)
  EXPECT_NEAR(dawson(0.1), 0.0993359923978528611, 1e-15);
  EXPECT_NEAR(dawson(0.9241), 0.5410442238175845170, 1e-15);
  EXPECT_NEAR(dawson(2.5), 0.2230837221674354811, 1e-15);
  EXPECT_NEAR(dawson(6.0), 0.0845426889745438522, 1e-15);
  EXPECT_EQ(dawson(0.0), 0.0);
  EXPECT_NEAR(dawson(-1.3), -dawson(1.3), 1e-16);
}

TEST(PatternFunctions, LowOrderClosedForms) {
  const PatternFunctions f(3);
  for (double x : {-2.0, -0.3, 0.0, 0.7, 3.1}) {
    const double F = dawson(x);
    EXPECT_NEAR(f.radial(0, 0, x), 2 - 4 * x * F, 1e-12);
    EXPECT_NEAR(f.radial(1, 1, x), -8 * F * x * x * x + 8 * F * x + 4 * x * x - 2, 1e-12);
    EXPECT_NEAR(f.radial(1, 0, x), 2 * std::sqrt(2.0) * (x + F - 2 * x * x * F), 1e-12);
    EXPECT_EQ(f.radial(2, 3, x), f.radial(3, 2, x));
  }
}

TEST(PatternFunctions, DualToFockProjectors) {
  // For |k><l| at a uniformly distributed phase, the phase-averaged estimate of
  // <m|rho|n> must be delta_{mk} delta_{nl}:
  // (1/pi) int_0^pi dtheta int dx f_mn(x) e^{i(m-n)theta} <x_theta|k><l|x_theta>
  // and <x_theta|k> = e^{-ik theta} psi_k(x) reduces the phase integral to
  // delta_{m-n, k-l}.
  const PatternFunctions f(3);
  for (int m = 0; m <= 3; ++m)
    for (int n = 0; n <= 3; ++n)
      for (int k = 0; k <= 3; ++k) {
        const int l = k - (m - n);
        if (l < 0 || l > 3) continue;
        const double v = oracle::integrate(
            [&](double x) { return f.radial(m, n, x) * hermite_ref(k, x) * hermite_ref(l, x); }, 14.0, 4001);
        EXPECT_NEAR(v, (m == k && n == l) ? 1.0 : 0.0, 1e-9) << m << n << k << l;
      }
}

TEST(Tomography, HermiteFunctions) {
  std::vector<double> psi;
  hermite_functions(0.83, 6, psi);
  for (int n = 0; n <= 6; ++n) EXPECT_NEAR(psi[n], hermite_ref(n, 0.83), 1e-13);
}

TEST(Tomography, JointDensityRoutesAgree) {
  const auto c = tomo_config();
  const auto by_branches = joint_pdf(final_branches(c), 0.4, 2.2);
  const auto by_wigner = joint_pdf(final_wigner(c), 0.4, 2.2);
  for (auto [xa, xb] : {std::pair{0.0, 0.0}, std::pair{0.9, -1.3}, std::pair{-2.0, 0.5}})
    EXPECT_NEAR(by_branches(xa, xb), by_wigner(xa, xb), 1e-9);
}

TEST(Tomography, InverseCdf) {
  GaussianPoly1D g;
  g.width = 1.0;
  g.coeffs = {1.0 / std::sqrt(M_PI)};
  EXPECT_NEAR(inverse_cdf(g, 0.5), 0.0, 1e-12);
  // Phi(x * sqrt(2)) = 0.8413447460685429 at x = 1/sqrt(2)
  EXPECT_NEAR(inverse_cdf(g, 0.8413447460685429), 1.0 / std::sqrt(2.0), 1e-10);
}

TEST(Tomography, SamplingDeterministicAndThreadIndependent) {
  const auto w = final_wigner(tomo_config());
  SamplingOptions o;
  o.n_samples = 3 * kSampleBlock + 17;
  o.seed = 99;
  const auto a = sample(w, o);
  o.threads = 3;
  const auto b = sample(w, o);
  ASSERT_EQ(a.samples.size(), o.n_samples);
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    ASSERT_EQ(a.samples[i].x_a, b.samples[i].x_a);
    ASSERT_EQ(a.samples[i].theta_b, b.samples[i].theta_b);
  }
  o.seed = 100;
  EXPECT_NE(sample(w, o).samples[0].x_a, a.samples[0].x_a);
}

TEST(Tomography, FixedGridCyclesPhasePairs) {
  SamplingOptions o;
  o.n_samples = kGridPhases * kGridPhases;
  o.policy = PhasePolicy::kFixedGrid;
  const auto rec = sample(vacuum_wigner(), o);
  std::set<std::pair<double, double>> pairs;
  for (const auto& s : rec.samples) {
    pairs.insert({s.theta_a, s.theta_b});
    EXPECT_GE(s.theta_a, 0.0);
    EXPECT_LT(s.theta_a, M_PI);
  }
  EXPECT_EQ(pairs.size(), std::size_t(kGridPhases * kGridPhases));
}

TEST(Tomography, SinglePhaseIsIllConditioned) {
  TomographyRecord rec;
  for (int i = 0; i < 1000; ++i) rec.samples.push_back({0.0, 0.0, 0.01 * i - 5, 0.3});
  try {
    reconstruct(rec);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kIllConditioned);
  }
}

TEST(Tomography, ReconstructsVacuum) {
  SamplingOptions o;
  o.n_samples = 200000;
  o.seed = 5;
  const auto rec = reconstruct(sample(vacuum_wigner(), o));
  EXPECT_NEAR(rec.estimate.p00(), 1.0, 5 * rec.se_real(0, 0));
  EXPECT_NEAR(rec.estimate.p11(), 0.0, 5 * rec.se_real(3, 3));
  EXPECT_GT(rec.se_real(0, 0), 0.0);
  EXPECT_LT(rec.se_real(0, 0), 0.02);
}

TEST(Tomography, ReconstructionWithinErrorsAtModerateN) {
  const auto c = tomo_config();
  SamplingOptions o;
  o.n_samples = 100000;
  o.seed = 17;
  const auto rec = reconstruct(sample(final_wigner(c), o));
  const auto ref = run(c).rho_p;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      EXPECT_LE(std::abs(rec.estimate.matrix(i, j).real() - ref.matrix(i, j).real()), 4.5 * rec.se_real(i, j) + 1e-12);
      EXPECT_LE(std::abs(rec.estimate.matrix(i, j).imag() - ref.matrix(i, j).imag()), 4.5 * rec.se_imag(i, j) + 1e-12);
    }
  EXPECT_NEAR(rec.concurrence, run(c).concurrence.value, 4.5 * rec.concurrence_se);
}

TEST(Tomography, RealParameterRoundTrip) {
  Eigen::Matrix4cd m = ProjectedDensityMatrix::from_x_fields(0.1, 0.2, 0.3, 0.4, {0.1, 0.05}, {-0.02, 0.01}).matrix;
  m(0, 1) = {0.01, 0.02};
  m(1, 0) = std::conj(m(0, 1));
  EXPECT_TRUE(from_real_parameters(to_real_parameters(m)).isApprox(m, 1e-15));
}

TEST(Tomography, RecordCsvRoundTrip) {
  TomographyRecord rec;
  rec.seed = 42;
  rec.policy = PhasePolicy::kFixedGrid;
  rec.config = {{"r", "1"}, {"eta", "0.95"}};
  rec.samples = {{0.1, 0.2, -1.5, 2.25}, {3.0, 0.0, 0.0, -0.125}};
  std::stringstream s;
  write_record_csv(s, rec);
  const std::string text = s.str();
  EXPECT_EQ(text.rfind("# schema: micromacro-tomography-record v1\n", 0), 0u);
  const auto back = read_record_csv(s);
  EXPECT_EQ(back.seed, 42u);
  EXPECT_EQ(back.policy, PhasePolicy::kFixedGrid);
  ASSERT_EQ(back.samples.size(), 2u);
  EXPECT_EQ(back.samples[1].x_b, -0.125);
  EXPECT_EQ(back.config, rec.config);
  std::stringstream again;
  write_record_csv(again, back);
  EXPECT_EQ(again.str(), text);
}

TEST(Tomography, MalformedRecord) {
  std::stringstream s("# schema: micromacro-tomography-record v1\ntheta_A,theta_B,x_A,x_B\n0.1,0.2,abc,0\n");
  try {
    read_record_csv(s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kIo);
  }
}
