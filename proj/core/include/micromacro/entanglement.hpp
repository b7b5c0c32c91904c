#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <string_view>

namespace micromacro {

using Complex = std::complex<double>;

/// Unnormalized two-qubit block of the final state on {0,1}_A x {0,1}_B.
///
/// Basis order is |i_A j_B> with flat index 2*i + j, i.e. |00>, |01>, |10>,
/// |11>. In this order the physically allowed entries form an "X":
///
///     p00  0    0    d'
///     0    p01  d    0
///     0    d*   p10  0
///     d'*  0    0    p11
///
/// The full matrix is always stored so that the zero pattern can be audited.
struct ProjectedDensityMatrix {
  Eigen::Matrix4cd matrix = Eigen::Matrix4cd::Zero();

  double p00() const { return matrix(0, 0).real(); }
  double p01() const { return matrix(1, 1).real(); }
  double p10() const { return matrix(2, 2).real(); }
  double p11() const { return matrix(3, 3).real(); }
  /// Coherence between |01> and |10>.
  Complex d() const { return matrix(1, 2); }
  /// Coherence between |00> and |11>.
  Complex d_prime() const { return matrix(0, 3); }

  double trace() const { return matrix.trace().real(); }

  /// Largest magnitude among the eight positions that are zero in an X-state.
  double off_x_max() const;

  /// Element accessor in (i_A, j_B; i'_A, j'_B) form.
  Complex& at(int i_a, int j_b, int ip_a, int jp_b) { return matrix(2 * i_a + j_b, 2 * ip_a + jp_b); }
  Complex at(int i_a, int j_b, int ip_a, int jp_b) const { return matrix(2 * i_a + j_b, 2 * ip_a + jp_b); }

  static ProjectedDensityMatrix from_x_fields(double p00, double p01, double p10, double p11,
                                              Complex d, Complex d_prime);
  /// (|10> + |01>)/sqrt(2): p01 = p10 = d = 1/2.
  static ProjectedDensityMatrix single_photon_bell();
};

/// True when (i, j) is one of the X positions (diagonal or anti-diagonal).
constexpr bool is_x_position(int row, int col) { return row == col || row + col == 3; }

enum class ConcurrenceBranch {
  kZero,             // both candidate expressions non-positive
  kCoherenceD,       // 2(|d| - sqrt(p00 p11)) attained the maximum
  kCoherenceDPrime,  // 2(|d'| - sqrt(p01 p10)) attained the maximum
  kGeneral,          // eigenvalue route on a matrix that need not be X-shaped
};

std::string_view to_string(ConcurrenceBranch branch);

struct ConcurrenceResult {
  double value = 0.0;
  ConcurrenceBranch branch = ConcurrenceBranch::kZero;
  /// Square roots of the eigenvalues of rho * rho_tilde, decreasing. Zero-filled
  /// by the X-state fast path.
  std::array<double, 4> eigenvalues{};
};

/// Positivity slack applied to the normalized matrix. Eigenvalues in
/// [-kPositivityTolerance, 0) are clamped, anything lower is an error.
inline constexpr double kPositivityTolerance = 1e-10;
/// Largest off-X magnitude accepted by the fast path.
inline constexpr double kXStateTolerance = 1e-8;

/// Wootters concurrence via the eigenvalues of rho * (sy x sy) rho^* (sy x sy)
/// on the trace-normalized matrix.
ConcurrenceResult concurrence_general(const ProjectedDensityMatrix& rho);

enum class OffXPolicy {
  kRequireX,  // raise kNotAnXState when off-X entries exceed kXStateTolerance
  kIgnore,    // evaluate on the X part only (used for noisy reconstructions)
};

/// Closed-form concurrence of an X-state:
/// max{0, 2(|d| - sqrt(p00 p11)), 2(|d'| - sqrt(p01 p10))} after normalization.
ConcurrenceResult concurrence_xstate(const ProjectedDensityMatrix& rho,
                                     OffXPolicy policy = OffXPolicy::kRequireX);

/// Probability of landing in the {0,1} x {0,1} subspace, i.e. the unnormalized trace.
double success_probability(const ProjectedDensityMatrix& rho);

/// Eigenvalues of the Hermitian part of the normalized matrix, ascending.
Eigen::Vector4d normalized_spectrum(const ProjectedDensityMatrix& rho);

}  // namespace micromacro
