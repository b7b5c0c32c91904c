#include <gtest/gtest.h>

#include <cmath>

#include "micromacro/error.hpp"
#include "micromacro/fock.hpp"
#include "micromacro/phase_space.hpp"
#include "micromacro/pipeline.hpp"
#include "oracles.hpp"

using namespace micromacro;

TEST(Wigner, InitialStateTraceAndBlock) {
  const auto w = initial_wigner();
  EXPECT_NEAR(wigner_trace(w).real(), 1.0, 1e-14);
  const auto p = extract_projected(w);
  const auto bell = ProjectedDensityMatrix::single_photon_bell();
  EXPECT_LT((p.matrix - bell.matrix).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Wigner, FockOperatorTablesReproduceKnownFunctions) {
  // W_|1><1|(x, p) = (2(x^2 + p^2) - 1) exp(-x^2 - p^2) / pi
  const auto t = fock_operator_wigner(1, 1);
  EXPECT_NEAR(t[0][0].real(), -1.0 / M_PI, 1e-15);
  EXPECT_NEAR(t[2][0].real(), 2.0 / M_PI, 1e-15);
  EXPECT_NEAR(t[0][2].real(), 2.0 / M_PI, 1e-15);
  EXPECT_THROW(fock_operator_wigner(2, 0), Error);
}

TEST(Wigner, SqueezedSectionsClosedForm) {
  const double r = 2.6;
  const std::vector<double> xs{-1.0, -0.05, 0.0, 0.02, 0.3};
  const auto s0x = single_mode_wigner_section(SingleModeState::kS0, r, xs, Quadrature::kX);
  const auto s1x = single_mode_wigner_section(SingleModeState::kS1, r, xs, Quadrature::kX);
  const auto s0p = single_mode_wigner_section(SingleModeState::kS0, r, xs, Quadrature::kP);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double ux = std::exp(2 * r) * xs[i] * xs[i];
    const double up = std::exp(-2 * r) * xs[i] * xs[i];
    EXPECT_NEAR(s0x[i], std::exp(-ux) / M_PI, 1e-14);
    EXPECT_NEAR(s1x[i], (2 * ux - 1) * std::exp(-ux) / M_PI, 1e-14);
    EXPECT_NEAR(s0p[i], std::exp(-up) / M_PI, 1e-14);
  }
}

TEST(Wigner, LossMatchesNumericConvolution) {
  // Mode B of S(r) applied to the initial state, then loss; probe W at fixed
  // mode-A coordinates.
  const double r = 0.5, eta = 0.7;
  const auto w = squeeze_rescale(initial_wigner(), r, +1);
  const auto lossy = loss_convolve(w, eta);
  const double xa = 0.4, pa = -0.2;
  auto slice = [&](double xb, double pb) { return w.evaluate(xa, pa, xb, pb).real(); };
  for (auto [xb, pb] : {std::pair{0.0, 0.0}, std::pair{0.3, -0.8}, std::pair{-1.1, 0.5}}) {
    const double ref = oracle::convolve_loss(slice, eta, xb, pb, 9.0, 601);
    EXPECT_NEAR(lossy.evaluate(xa, pa, xb, pb).real(), ref, 1e-10) << xb << "," << pb;
  }
}

TEST(Wigner, LossOnModeAMatchesNumericConvolution) {
  const double eta = 0.6;
  const auto w = initial_wigner();
  const auto lossy = loss_convolve(w, eta, Mode::kA);
  const double xb = 0.7, pb = 0.1;
  auto slice = [&](double xa, double pa) { return w.evaluate(xa, pa, xb, pb).real(); };
  const double ref = oracle::convolve_loss(slice, eta, -0.3, 0.9, 9.0, 401);
  EXPECT_NEAR(lossy.evaluate(-0.3, 0.9, xb, pb).real(), ref, 1e-11);
}

TEST(Wigner, LossPreservesTraceAndVacuum) {
  const auto vac = vacuum_wigner();
  const auto out = loss_convolve(vac, 0.37);
  EXPECT_LT(out.max_coefficient_difference(vac), 1e-12);
  const auto w = loss_convolve(squeeze_rescale(initial_wigner(), 1.3, +1), 0.8);
  EXPECT_NEAR(wigner_trace(w).real(), 1.0, 1e-12);
}

TEST(Wigner, LossSemigroup) {
  const auto w = squeeze_rescale(initial_wigner(), 0.9, +1);
  const auto twice = loss_convolve(loss_convolve(w, 0.9), 0.8);
  const auto once = loss_convolve(w, 0.72);
  EXPECT_LT(twice.max_coefficient_difference(once), 1e-10);
}

TEST(Wigner, SqueezeRoundTrip) {
  const auto w = initial_wigner();
  const auto back = squeeze_rescale(squeeze_rescale(w, 2.0, +1), 2.0, -1);
  EXPECT_LT(back.max_coefficient_difference(w), 1e-12);
}

TEST(Wigner, InvalidEtaAndDegree) {
  try {
    loss_convolve(initial_wigner(), 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidEta);
  }
  MomentQuery q;
  q.exponents = {kMaxMomentExponent + 1, 0, 0, 0};
  try {
    gaussian_moment(initial_wigner(), q);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kUnsupportedDegree);
  }
}

TEST(Wigner, SecondMomentsOfSqueezedPhoton) {
  // |0><0| x S(r)|1><1|S(r)^dag: <X_B^2> = 3/2 e^{-2r}, <P_B^2> = 3/2 e^{2r}.
  const double r = 0.8;
  const auto w = squeeze_rescale(fock_product_wigner(0, 1), r, +1);
  MomentQuery q;
  q.exponents = {0, 0, 2, 0};
  EXPECT_NEAR(gaussian_moment(w, q).real(), 1.5 * std::exp(-2 * r), 1e-13);
  q.exponents = {0, 0, 0, 2};
  EXPECT_NEAR(gaussian_moment(w, q).real(), 1.5 * std::exp(2 * r), 1e-12);
}

TEST(QuadratureDensity, IntegratesWignerOverConjugates) {
  const double ta = 0.3, tb = 1.1;
  const auto w = loss_convolve(squeeze_rescale(initial_wigner(), 0.6, +1), 0.9);
  const auto qd = quadrature_density(w, ta, tb);
  EXPECT_NEAR(qd.integral(), 1.0, 1e-12);
  const double xa = 0.5, xb = -0.4;
  // p(xa, xb) = int W(xa cos - ya sin, xa sin + ya cos, ...) dya dyb
  auto inner = [&](double ya) {
    return oracle::integrate(
        [&](double yb) {
          return w.evaluate(xa * std::cos(ta) - ya * std::sin(ta), xa * std::sin(ta) + ya * std::cos(ta),
                            xb * std::cos(tb) - yb * std::sin(tb), xb * std::sin(tb) + yb * std::cos(tb))
              .real();
        },
        12.0, 601);
  };
  EXPECT_NEAR(qd.evaluate(xa, xb), oracle::integrate(inner, 12.0, 601), 1e-11);
  const auto ma = qd.marginal_a();
  EXPECT_NEAR(ma.integral(), 1.0, 1e-12);
  EXPECT_NEAR(ma.cumulative(50.0), 1.0, 1e-12);
  EXPECT_NEAR(ma.cumulative(0.2), oracle::integrate([&](double x) { return x < 0.2 ? ma.evaluate(x) : 0.0; }, 20.0,
                                                     400001),
              1e-4);
}

TEST(ProjectedBlock, WignerOverlapMatchesFockEngine) {
  ExperimentConfig c;
  c.r = 0.9;
  c.eta1 = 0.95;
  c.eta = 0.9;
  c.eta2 = 0.85;
  c.tail_tol = 1e-14;
  EngineDiagnostics d;
  const auto fock = run_fock(c, d);
  const auto ps = run_phase_space(c);
  EXPECT_LT((fock.matrix - ps.matrix).cwiseAbs().maxCoeff(), 1e-10);
}
