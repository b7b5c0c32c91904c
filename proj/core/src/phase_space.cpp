#include "micromacro/phase_space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "micromacro/error.hpp"

namespace micromacro {

namespace {

constexpr double kPi = std::numbers::pi;

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double result = 1.0;
  for (int i = 1; i <= k; ++i) result = result * (n - k + i) / i;
  return result;
}

// (k - 1)!! for even k >= 0, with (-1)!! = 1.
double odd_double_factorial(int k) {
  double result = 1.0;
  for (int i = k - 1; i > 1; i -= 2) result *= i;
  return result;
}

// int x^k exp(-width x^2) dx over the real line.
double univariate_moment(double width, int k) {
  if (k % 2 != 0) return 0.0;
  return odd_double_factorial(k) / std::pow(2.0 * width, k / 2) * std::sqrt(kPi / width);
}

std::array<int, 2> mode_variables(Mode mode) {
  return mode == Mode::kA ? std::array<int, 2>{kXA, kPA} : std::array<int, 2>{kXB, kPB};
}

template <typename Fn>
void for_each_index(int degree, Fn&& fn) {
  for (int a = 0; a <= degree; ++a)
    for (int b = 0; b <= degree; ++b)
      for (int c = 0; c <= degree; ++c)
        for (int d = 0; d <= degree; ++d) fn(std::array<int, 4>{a, b, c, d});
}

// Closed-form convolution of one quadrature with the attenuation kernel.
// For q(x') exp(-g x'^2) the result is
//   (1/sqrt(D)) sum_j q_j sum_{i even} C(j,i) (lambda x)^{j-i} (i-1)!! s^i
//   * exp(-(g/D) x^2),
// with D = g(1-eta) + eta, lambda = sqrt(eta)/D, s^2 = (1-eta)/(2D). Written
// this way every factor stays finite as eta -> 1.
GaussianPolyWigner convolve_variable(const GaussianPolyWigner& w, int variable, double eta) {
  const double g = w.widths[variable];
  const double denom = g * (1.0 - eta) + eta;
  const double lambda = std::sqrt(eta) / denom;
  const double spread = (1.0 - eta) / (2.0 * denom);
  const double norm = 1.0 / std::sqrt(denom);

  GaussianPolyWigner out(w.degree);
  out.widths = w.widths;
  out.widths[variable] = g / denom;
  for_each_index(w.degree, [&](std::array<int, 4> e) {
    const Complex c = w.coeff(e[0], e[1], e[2], e[3]);
    if (c == Complex{}) return;
    const int j = e[variable];
    for (int i = 0; i <= j; i += 2) {
      std::array<int, 4> target = e;
      target[variable] = j - i;
      const double factor =
          binomial(j, i) * std::pow(lambda, j - i) * odd_double_factorial(i) * std::pow(spread, i / 2) * norm;
      out.coeff(target[0], target[1], target[2], target[3]) += c * factor;
    }
  });
  return out;
}

}  // namespace

Complex GaussianPolyWigner::evaluate(double xa, double pa, double xb, double pb) const {
  const std::array<double, 4> z{xa, pa, xb, pb};
  std::array<std::vector<double>, 4> powers;
  for (int v = 0; v < 4; ++v) {
    powers[v].resize(degree + 1);
    powers[v][0] = 1.0;
    for (int k = 1; k <= degree; ++k) powers[v][k] = powers[v][k - 1] * z[v];
  }
  Complex sum{};
  for_each_index(degree, [&](std::array<int, 4> e) {
    const Complex c = coeff(e[0], e[1], e[2], e[3]);
    if (c == Complex{}) return;
    sum += c * powers[0][e[0]] * powers[1][e[1]] * powers[2][e[2]] * powers[3][e[3]];
  });
  double exponent = 0.0;
  for (int v = 0; v < 4; ++v) exponent -= widths[v] * z[v] * z[v];
  return sum * std::exp(exponent);
}

int GaussianPolyWigner::effective_degree(double tol) const {
  int highest = 0;
  for_each_index(degree, [&](std::array<int, 4> e) {
    if (std::abs(coeff(e[0], e[1], e[2], e[3])) > tol) highest = std::max({highest, e[0], e[1], e[2], e[3]});
  });
  return highest;
}

double GaussianPolyWigner::max_coefficient_difference(const GaussianPolyWigner& other, double width_tol) const {
  for (int v = 0; v < 4; ++v) {
    if (std::abs(widths[v] - other.widths[v]) > width_tol * std::max(1.0, std::abs(widths[v]))) {
      return std::numeric_limits<double>::infinity();
    }
  }
  const int top = std::max(degree, other.degree);
  double worst = 0.0;
  for_each_index(top, [&](std::array<int, 4> e) {
    auto get = [&](const GaussianPolyWigner& w) {
      for (int x : e)
        if (x > w.degree) return Complex{};
      return w.coeff(e[0], e[1], e[2], e[3]);
    };
    worst = std::max(worst, std::abs(get(*this) - get(other)));
  });
  return worst;
}

std::array<std::array<Complex, 3>, 3> fock_operator_wigner(int m, int n) {
  if (m < 0 || m > 1 || n < 0 || n > 1) {
    throw Error(ErrorKind::kInvalidArgument, "Fock operator Wigner tables exist for m, n in {0, 1}");
  }
  std::array<std::array<Complex, 3>, 3> t{};
  const double s2 = std::numbers::sqrt2;
  if (m == 0 && n == 0) {
    t[0][0] = 1.0 / kPi;
  } else if (m == 1 && n == 1) {
    t[0][0] = -1.0 / kPi;
    t[2][0] = 2.0 / kPi;
    t[0][2] = 2.0 / kPi;
  } else if (m == 1 && n == 0) {
    // W of |1><0|: sqrt(2) (x - i p) e^{-x^2-p^2} / pi
    t[1][0] = s2 / kPi;
    t[0][1] = Complex(0.0, -s2 / kPi);
  } else {
    t[1][0] = s2 / kPi;
    t[0][1] = Complex(0.0, s2 / kPi);
  }
  return t;
}

GaussianPolyWigner initial_wigner() {
  GaussianPolyWigner w(2);
  for (int m = 0; m <= 1; ++m) {
    for (int n = 0; n <= 1; ++n) {
      const auto wa = fock_operator_wigner(m, n);
      const auto wb = fock_operator_wigner(1 - m, 1 - n);
      for (int a = 0; a <= 2; ++a)
        for (int b = 0; b <= 2; ++b)
          for (int c = 0; c <= 2; ++c)
            for (int d = 0; d <= 2; ++d) w.coeff(a, b, c, d) += 0.5 * wa[a][b] * wb[c][d];
    }
  }
  return w;
}

GaussianPolyWigner fock_product_wigner(int m, int n) {
  GaussianPolyWigner w(2);
  const auto wa = fock_operator_wigner(m, m);
  const auto wb = fock_operator_wigner(n, n);
  for (int a = 0; a <= 2; ++a)
    for (int b = 0; b <= 2; ++b)
      for (int c = 0; c <= 2; ++c)
        for (int d = 0; d <= 2; ++d) w.coeff(a, b, c, d) = wa[a][b] * wb[c][d];
  return w;
}

GaussianPolyWigner vacuum_wigner() { return fock_product_wigner(0, 0); }

GaussianPolyWigner squeeze_rescale(const GaussianPolyWigner& w, double r, int sign, Mode mode) {
  if (sign != 1 && sign != -1) throw Error(ErrorKind::kInvalidArgument, "squeeze sign must be +1 or -1");
  const auto [vx, vp] = mode_variables(mode);
  const double s = sign * r;
  GaussianPolyWigner out = w;
  out.widths[vx] = w.widths[vx] * std::exp(2.0 * s);
  out.widths[vp] = w.widths[vp] * std::exp(-2.0 * s);
  for_each_index(w.degree, [&](std::array<int, 4> e) {
    out.coeff(e[0], e[1], e[2], e[3]) *= std::exp(s * (e[vx] - e[vp]));
  });
  return out;
}

GaussianPolyWigner loss_convolve(const GaussianPolyWigner& w, double eta, Mode mode) {
  if (!(eta > 0.0 && eta <= 1.0)) {
    throw Error(ErrorKind::kInvalidEta,
                "phase-space loss needs transmission in (0, 1], got " + format_number(eta));
  }
  if (eta == 1.0) return w;
  const auto [vx, vp] = mode_variables(mode);
  return convolve_variable(convolve_variable(w, vx, eta), vp, eta);
}

Complex gaussian_moment(const GaussianPolyWigner& w, const MomentQuery& query) {
  for (int e : query.exponents) {
    if (e < 0 || e > kMaxMomentExponent) {
      throw Error(ErrorKind::kUnsupportedDegree,
                  "moment exponents must lie in [0, " + std::to_string(kMaxMomentExponent) + "]");
    }
  }
  Complex total{};
  for_each_index(w.degree, [&](std::array<int, 4> e) {
    const Complex c = w.coeff(e[0], e[1], e[2], e[3]);
    if (c == Complex{}) return;
    double m = 1.0;
    for (int v = 0; v < 4; ++v) m *= univariate_moment(w.widths[v], e[v] + query.exponents[v]);
    total += c * m;
  });
  return total;
}

Complex wigner_trace(const GaussianPolyWigner& w) { return gaussian_moment(w, MomentQuery{}); }

ProjectedDensityMatrix extract_projected(const GaussianPolyWigner& w) {
  // Moments of each variable against the extra exp(-v^2) of the basis Wigner.
  const int top = w.degree + 2;
  std::array<std::vector<double>, 4> moments;
  for (int v = 0; v < 4; ++v) {
    moments[v].resize(top + 1);
    for (int k = 0; k <= top; ++k) moments[v][k] = univariate_moment(w.widths[v] + 1.0, k);
  }
  const double scale = 4.0 * kPi * kPi;

  ProjectedDensityMatrix rho;
  for (int i = 0; i <= 1; ++i)
    for (int j = 0; j <= 1; ++j)
      for (int ip = 0; ip <= 1; ++ip)
        for (int jp = 0; jp <= 1; ++jp) {
          const auto wa = fock_operator_wigner(ip, i);
          const auto wb = fock_operator_wigner(jp, j);
          Complex total{};
          for_each_index(w.degree, [&](std::array<int, 4> e) {
            const Complex c = w.coeff(e[0], e[1], e[2], e[3]);
            if (c == Complex{}) return;
            Complex a_part{};
            for (int ea = 0; ea <= 2; ++ea)
              for (int fa = 0; fa <= 2; ++fa) {
                if (wa[ea][fa] == Complex{}) continue;
                a_part += wa[ea][fa] * moments[kXA][e[0] + ea] * moments[kPA][e[1] + fa];
              }
            if (a_part == Complex{}) return;
            Complex b_part{};
            for (int eb = 0; eb <= 2; ++eb)
              for (int fb = 0; fb <= 2; ++fb) {
                if (wb[eb][fb] == Complex{}) continue;
                b_part += wb[eb][fb] * moments[kXB][e[2] + eb] * moments[kPB][e[3] + fb];
              }
            total += c * a_part * b_part;
          });
          rho.at(i, j, ip, jp) = scale * total;
        }
  return rho;
}

std::vector<double> single_mode_wigner_section(SingleModeState state, double r, std::span<const double> points,
                                               Quadrature axis) {
  const int photon = state == SingleModeState::kS0 ? 0 : 1;
  const GaussianPolyWigner w = squeeze_rescale(fock_product_wigner(0, photon), r, +1, Mode::kB);
  std::vector<double> out;
  out.reserve(points.size());
  for (double x : points) {
    // Divide out the mode-A vacuum value 1/pi at the origin.
    const Complex value = axis == Quadrature::kX ? w.evaluate(0.0, 0.0, x, 0.0) : w.evaluate(0.0, 0.0, 0.0, x);
    out.push_back(kPi * value.real());
  }
  return out;
}

double GaussianPoly1D::evaluate(double x) const {
  double acc = 0.0;
  for (int k = static_cast<int>(coeffs.size()) - 1; k >= 0; --k) acc = acc * x + coeffs[k];
  return acc * std::exp(-width * x * x);
}

double GaussianPoly1D::integral() const {
  double total = 0.0;
  for (std::size_t k = 0; k < coeffs.size(); ++k) total += coeffs[k] * univariate_moment(width, static_cast<int>(k));
  return total;
}

double GaussianPoly1D::cumulative(double x) const {
  if (x == -std::numeric_limits<double>::infinity()) return 0.0;
  if (x == std::numeric_limits<double>::infinity()) return integral();
  // J_k(x) = int_{-inf}^{x} t^k e^{-g t^2} dt via
  // J_k = -x^{k-1} e^{-g x^2} / (2g) + (k-1)/(2g) J_{k-2}.
  const double g = width;
  const double gauss = std::exp(-g * x * x);
  const int top = static_cast<int>(coeffs.size());
  std::vector<double> j(std::max(top, 2));
  j[0] = 0.5 * std::sqrt(kPi / g) * std::erfc(-std::sqrt(g) * x);
  j[1] = -gauss / (2.0 * g);
  double x_power = 1.0;  // x^{k-1}
  for (int k = 2; k < top; ++k) {
    x_power *= x;
    j[k] = -x_power * gauss / (2.0 * g) + (k - 1) / (2.0 * g) * j[k - 2];
  }
  double total = 0.0;
  for (int k = 0; k < top; ++k) total += coeffs[k] * j[k];
  return total;
}

double QuadratureDensity::evaluate(double xa, double xb) const {
  double acc = 0.0;
  double pa = 1.0;
  for (const auto& row : coeffs) {
    double pb = 1.0;
    for (double c : row) {
      acc += c * pa * pb;
      pb *= xb;
    }
    pa *= xa;
  }
  return acc * std::exp(-width_a * xa * xa - width_b * xb * xb);
}

double QuadratureDensity::integral() const { return marginal_a().integral(); }

GaussianPoly1D QuadratureDensity::marginal_a() const {
  GaussianPoly1D out;
  out.width = width_a;
  out.coeffs.assign(coeffs.size(), 0.0);
  for (std::size_t a = 0; a < coeffs.size(); ++a)
    for (std::size_t b = 0; b < coeffs[a].size(); ++b)
      out.coeffs[a] += coeffs[a][b] * univariate_moment(width_b, static_cast<int>(b));
  return out;
}

GaussianPoly1D QuadratureDensity::conditional_b(double xa) const {
  GaussianPoly1D out;
  out.width = width_b;
  out.coeffs.assign(coeffs.empty() ? 0 : coeffs[0].size(), 0.0);
  const double envelope = std::exp(-width_a * xa * xa);
  double pa = envelope;
  for (const auto& row : coeffs) {
    for (std::size_t b = 0; b < row.size(); ++b) out.coeffs[b] += row[b] * pa;
    pa *= xa;
  }
  return out;
}

namespace {

// Marginal of X^a P^b exp(-gx X^2 - gp P^2) over the conjugate of the rotated
// quadrature x = X cos(theta) + P sin(theta). Fills poly[a][b][k] (coefficient
// of x^k) and returns the resulting width in x.
double rotated_marginals(double gx, double gp, double theta, int degree,
                         std::vector<std::vector<std::vector<double>>>& poly) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const double a_p = gx * s * s + gp * c * c;
  const double mu = (gx - gp) * s * c / a_p;
  const double width = gx * gp / a_p;
  const double alpha = c - mu * s;
  const double beta = s + mu * c;
  // X = alpha x - s t, P = beta x + c t, with t = p - mu x Gaussian of width a_p.
  std::vector<double> t_moment(2 * degree + 1);
  for (int i = 0; i <= 2 * degree; ++i) t_moment[i] = univariate_moment(a_p, i);

  poly.assign(degree + 1, std::vector<std::vector<double>>(degree + 1, std::vector<double>(2 * degree + 1, 0.0)));
  for (int a = 0; a <= degree; ++a)
    for (int b = 0; b <= degree; ++b)
      for (int i1 = 0; i1 <= a; ++i1)
        for (int i2 = 0; i2 <= b; ++i2) {
          if ((i1 + i2) % 2 != 0) continue;
          const double coefficient = binomial(a, i1) * std::pow(alpha, a - i1) * std::pow(-s, i1) *
                                     binomial(b, i2) * std::pow(beta, b - i2) * std::pow(c, i2);
          poly[a][b][a + b - i1 - i2] += coefficient * t_moment[i1 + i2];
        }
  return width;
}

}  // namespace

QuadratureDensity quadrature_density(const GaussianPolyWigner& w, double theta_a, double theta_b) {
  std::vector<std::vector<std::vector<double>>> ta;
  std::vector<std::vector<std::vector<double>>> tb;
  QuadratureDensity out;
  out.width_a = rotated_marginals(w.widths[kXA], w.widths[kPA], theta_a, w.degree, ta);
  out.width_b = rotated_marginals(w.widths[kXB], w.widths[kPB], theta_b, w.degree, tb);
  const int top = 2 * w.degree;
  out.coeffs.assign(top + 1, std::vector<double>(top + 1, 0.0));
  for_each_index(w.degree, [&](std::array<int, 4> e) {
    const Complex c = w.coeff(e[0], e[1], e[2], e[3]);
    if (c == Complex{}) return;
    const auto& pa = ta[e[0]][e[1]];
    const auto& pb = tb[e[2]][e[3]];
    // Physical states give a real density; the imaginary parts cancel in the sum.
    for (int ka = 0; ka <= top; ++ka) {
      if (pa[ka] == 0.0) continue;
      for (int kb = 0; kb <= top; ++kb) out.coeffs[ka][kb] += c.real() * pa[ka] * pb[kb];
    }
  });
  return out;
}

}  // namespace micromacro
