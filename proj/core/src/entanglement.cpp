#include "micromacro/entanglement.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "micromacro/error.hpp"

namespace micromacro {

namespace {

// sigma_y (x) sigma_y in the |00>,|01>,|10>,|11> basis.
Eigen::Matrix4cd spin_flip() {
  Eigen::Matrix4cd y = Eigen::Matrix4cd::Zero();
  y(0, 3) = -1.0;
  y(1, 2) = 1.0;
  y(2, 1) = 1.0;
  y(3, 0) = -1.0;
  return y;
}

Eigen::Matrix4cd normalized_hermitian(const ProjectedDensityMatrix& rho) {
  const double tr = rho.trace();
  if (!(tr > 0.0) || !std::isfinite(tr)) {
    throw Error(ErrorKind::kZeroTrace, "projected matrix has non-positive trace " + format_number(tr));
  }
  Eigen::Matrix4cd m = rho.matrix / tr;
  return 0.5 * (m + m.adjoint());
}

}  // namespace

double ProjectedDensityMatrix::off_x_max() const {
  double worst = 0.0;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (!is_x_position(i, j)) worst = std::max(worst, std::abs(matrix(i, j)));
    }
  }
  return worst;
}

ProjectedDensityMatrix ProjectedDensityMatrix::from_x_fields(double p00, double p01, double p10,
                                                             double p11, Complex d, Complex d_prime) {
  ProjectedDensityMatrix rho;
  rho.matrix(0, 0) = p00;
  rho.matrix(1, 1) = p01;
  rho.matrix(2, 2) = p10;
  rho.matrix(3, 3) = p11;
  rho.matrix(1, 2) = d;
  rho.matrix(2, 1) = std::conj(d);
  rho.matrix(0, 3) = d_prime;
  rho.matrix(3, 0) = std::conj(d_prime);
  return rho;
}

ProjectedDensityMatrix ProjectedDensityMatrix::single_photon_bell() {
  return from_x_fields(0.0, 0.5, 0.5, 0.0, 0.5, 0.0);
}

std::string_view to_string(ConcurrenceBranch branch) {
  switch (branch) {
    case ConcurrenceBranch::kZero: return "zero";
    case ConcurrenceBranch::kCoherenceD: return "d";
    case ConcurrenceBranch::kCoherenceDPrime: return "d_prime";
    case ConcurrenceBranch::kGeneral: return "general";
  }
  return "unknown";
}

Eigen::Vector4d normalized_spectrum(const ProjectedDensityMatrix& rho) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> solver(normalized_hermitian(rho));
  return solver.eigenvalues();
}

ConcurrenceResult concurrence_general(const ProjectedDensityMatrix& rho) {
  const Eigen::Matrix4cd m = normalized_hermitian(rho);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> solver(m);
  Eigen::Vector4d w = solver.eigenvalues();
  if (w.minCoeff() < -kPositivityTolerance) {
    throw Error(ErrorKind::kNonPositive,
                "normalized projected matrix has eigenvalue " + format_number(w.minCoeff()));
  }
  w = w.cwiseMax(0.0);
  const Eigen::Matrix4cd v = solver.eigenvectors();
  const Eigen::Matrix4cd sqrt_rho = v * w.cwiseSqrt().cast<Complex>().asDiagonal() * v.adjoint();

  // The lambda_i are the square roots of the eigenvalues of rho * rho_tilde,
  // which equal the singular values of sqrt(rho) Y sqrt(rho)^*. The SVD form
  // keeps near-zero lambdas accurate to machine precision instead of sqrt(eps).
  const Eigen::Matrix4cd a = sqrt_rho * spin_flip() * sqrt_rho.conjugate();
  Eigen::JacobiSVD<Eigen::Matrix4cd> svd(a);
  Eigen::Vector4d s = svd.singularValues();
  std::array<double, 4> lambda{s(0), s(1), s(2), s(3)};
  std::sort(lambda.begin(), lambda.end(), std::greater<>());

  ConcurrenceResult result;
  result.eigenvalues = lambda;
  const double c = lambda[0] - lambda[1] - lambda[2] - lambda[3];
  result.value = std::clamp(c, 0.0, 1.0);
  result.branch = result.value > 0.0 ? ConcurrenceBranch::kGeneral : ConcurrenceBranch::kZero;
  return result;
}

ConcurrenceResult concurrence_xstate(const ProjectedDensityMatrix& rho, OffXPolicy policy) {
  const double tr = rho.trace();
  if (!(tr > 0.0) || !std::isfinite(tr)) {
    throw Error(ErrorKind::kZeroTrace, "projected matrix has non-positive trace " + format_number(tr));
  }
  if (policy == OffXPolicy::kRequireX && rho.off_x_max() / tr > kXStateTolerance) {
    throw Error(ErrorKind::kNotAnXState,
                "off-X residual " + format_number(rho.off_x_max() / tr) + " exceeds tolerance");
  }
  const double p00 = std::max(rho.p00(), 0.0) / tr;
  const double p01 = std::max(rho.p01(), 0.0) / tr;
  const double p10 = std::max(rho.p10(), 0.0) / tr;
  const double p11 = std::max(rho.p11(), 0.0) / tr;
  const double via_d = 2.0 * (std::abs(rho.d()) / tr - std::sqrt(p00 * p11));
  const double via_d_prime = 2.0 * (std::abs(rho.d_prime()) / tr - std::sqrt(p01 * p10));

  ConcurrenceResult result;
  if (via_d <= 0.0 && via_d_prime <= 0.0) {
    result.branch = ConcurrenceBranch::kZero;
    result.value = 0.0;
  } else if (via_d >= via_d_prime) {
    result.branch = ConcurrenceBranch::kCoherenceD;
    result.value = std::min(via_d, 1.0);
  } else {
    result.branch = ConcurrenceBranch::kCoherenceDPrime;
    result.value = std::min(via_d_prime, 1.0);
  }
  return result;
}

double success_probability(const ProjectedDensityMatrix& rho) { return rho.trace(); }

}  // namespace micromacro
