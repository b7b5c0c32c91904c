#pragma once

#include <array>
#include <complex>
#include <span>
#include <vector>

#include "micromacro/entanglement.hpp"

namespace micromacro {

using Complex = std::complex<double>;

enum class Mode { kA, kB };
enum class Quadrature { kX, kP };

/// Variable order used by every four-variable table: X_A, P_A, X_B, P_B.
enum PhaseVariable : int { kXA = 0, kPA = 1, kXB = 2, kPB = 3 };

/// Exact two-mode Wigner function
///
///   W(z) = sum_{abcd} c_{abcd} X_A^a P_A^b X_B^c P_B^d
///          * exp(-g_XA X_A^2 - g_PA P_A^2 - g_XB X_B^2 - g_PB P_B^2)
///
/// Units: vacuum quadrature variance 1/2, so the vacuum is exp(-X^2-P^2)/pi
/// per mode. Coefficients carry all normalization, so the integral of W equals
/// the trace of the represented operator. Every transformation used here
/// keeps the Gaussian axis-aligned and the per-variable degree fixed.
struct GaussianPolyWigner {
  std::array<double, 4> widths{1.0, 1.0, 1.0, 1.0};
  int degree = 2;  // largest exponent per variable held in the table
  std::vector<Complex> coeffs;

  GaussianPolyWigner() : GaussianPolyWigner(2) {}
  explicit GaussianPolyWigner(int max_degree)
      : degree(max_degree), coeffs(static_cast<std::size_t>((max_degree + 1) * (max_degree + 1) *
                                                            (max_degree + 1) * (max_degree + 1))) {}

  std::size_t index(int a, int b, int c, int d) const {
    const int s = degree + 1;
    return static_cast<std::size_t>(((a * s + b) * s + c) * s + d);
  }
  Complex& coeff(int a, int b, int c, int d) { return coeffs[index(a, b, c, d)]; }
  Complex coeff(int a, int b, int c, int d) const { return coeffs[index(a, b, c, d)]; }

  Complex evaluate(double xa, double pa, double xb, double pb) const;
  /// Highest exponent of any variable carrying a coefficient above tol.
  int effective_degree(double tol = 0.0) const;
  /// Largest coefficient-wise difference after aligning widths; infinity if
  /// the widths differ by more than width_tol (relative).
  double max_coefficient_difference(const GaussianPolyWigner& other, double width_tol = 1e-12) const;
};

/// Single-mode Wigner function of |m><n| for m, n in {0, 1}, as a 3x3 table
/// over x^e p^f times exp(-x^2 - p^2).
std::array<std::array<Complex, 3>, 3> fock_operator_wigner(int m, int n);

/// Wigner function of (|1>_A|0>_B + |0>_A|1>_B)/sqrt(2).
GaussianPolyWigner initial_wigner();
/// Two-mode vacuum.
GaussianPolyWigner vacuum_wigner();
/// |m><m|_A (x) |n><n|_B for m, n in {0, 1}.
GaussianPolyWigner fock_product_wigner(int m, int n);

/// Substitutes (X, P) -> (e^{sign r} X, e^{-sign r} P) on the chosen mode.
/// sign = +1 is the amplifier S(r), sign = -1 its inverse.
GaussianPolyWigner squeeze_rescale(const GaussianPolyWigner& w, double r, int sign, Mode mode = Mode::kB);

/// Convolution with the transmission-eta attenuation kernel on the chosen
/// mode, in closed form. eta must lie in (0, 1].
GaussianPolyWigner loss_convolve(const GaussianPolyWigner& w, double eta, Mode mode = Mode::kB);

struct MomentQuery {
  std::array<int, 4> exponents{};
};
inline constexpr int kMaxMomentExponent = 6;

/// Exact integral of X_A^a P_A^b X_B^c P_B^d W over phase space.
Complex gaussian_moment(const GaussianPolyWigner& w, const MomentQuery& query);
/// Trace of the represented operator, i.e. the moment (0,0,0,0).
Complex wigner_trace(const GaussianPolyWigner& w);

/// Projected {0,1} x {0,1} block from the overlap formula
/// <i j|rho|i' j'> = (2 pi)^2 int W W_{|i'><i|}(A) W_{|j'><j|}(B).
ProjectedDensityMatrix extract_projected(const GaussianPolyWigner& w);

enum class SingleModeState { kS0, kS1 };

/// W(X, 0) (axis kX) or W(0, P) (axis kP) of S(r)|0> or S(r)|1>.
std::vector<double> single_mode_wigner_section(SingleModeState state, double r, std::span<const double> points,
                                               Quadrature axis = Quadrature::kX);

/// Univariate polynomial times exp(-width x^2), used for quadrature marginals.
struct GaussianPoly1D {
  double width = 1.0;
  std::vector<double> coeffs;  // coeffs[k] multiplies x^k

  double evaluate(double x) const;
  double integral() const;
  /// int_{-inf}^{x} of the density (not normalized).
  double cumulative(double x) const;
};

/// Joint homodyne density p(x_A, x_B) at local-oscillator phases (theta_A,
/// theta_B), obtained by integrating W over the conjugate rotated quadratures:
/// coeffs[a][b] x_A^a x_B^b exp(-g_A x_A^2 - g_B x_B^2).
struct QuadratureDensity {
  double width_a = 1.0;
  double width_b = 1.0;
  std::vector<std::vector<double>> coeffs;

  double evaluate(double xa, double xb) const;
  double integral() const;
  GaussianPoly1D marginal_a() const;
  GaussianPoly1D conditional_b(double xa) const;  // unnormalized p(xa, .)
};

QuadratureDensity quadrature_density(const GaussianPolyWigner& w, double theta_a, double theta_b);

}  // namespace micromacro
