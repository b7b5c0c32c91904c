#include "squeeze_propagator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "micromacro/error.hpp"

namespace micromacro::detail {

namespace {

using Complex = std::complex<double>;

// Chebyshev argument per step. Larger steps need fewer total terms but a
// longer series per boundary check.
constexpr double kMaxStepArgument = 250.0;
// Fraction of the working size treated as the reflection guard band.
constexpr double kGuardFraction = 0.8;

std::vector<double> generator_couplings(int size) {
  // g[n] = sqrt(n (n - 1)) / 2 couples n <-> n - 2.
  std::vector<double> g(size + 2);
  for (int n = 0; n < size + 2; ++n) g[n] = 0.5 * std::sqrt(static_cast<double>(n) * (n - 1.0));
  g[0] = g[1] = 0.0;
  return g;
}

// y = (G / b) x with (G x)[n] = g[n+2] x[n+2] - g[n] x[n-2].
void apply_scaled_generator(const std::vector<Complex>& x, const std::vector<double>& g, double inv_b,
                            std::vector<Complex>& y) {
  const int size = static_cast<int>(x.size());
  for (int n = 0; n < size; ++n) {
    Complex acc{};
    if (n + 2 < size) acc += g[n + 2] * x[n + 2];
    if (n >= 2) acc -= g[n] * x[n - 2];
    y[n] = acc * inv_b;
  }
}

double guard_mass(const std::vector<Complex>& psi) {
  const int size = static_cast<int>(psi.size());
  const int start = static_cast<int>(kGuardFraction * size);
  double mass = 0.0;
  for (int n = start; n < size; ++n) mass += std::norm(psi[n]);
  return mass;
}

// One Chebyshev step exp(z G / b) applied to psi. Uses the real recurrence
// Q_{k+1} = 2 (G/b) Q_k + Q_{k-1}, which is i^k T_k(-i G / b).
int chebyshev_step(std::vector<Complex>& psi, const std::vector<double>& g, double b, double z) {
  const int size = static_cast<int>(psi.size());
  const double sign = z < 0.0 ? -1.0 : 1.0;
  const double za = std::abs(z);
  const int k_max = static_cast<int>(std::ceil(za + 10.0 * std::cbrt(za) + 20.0));
  const std::vector<double> bessel = bessel_j_sequence(za, k_max);
  const double inv_b = sign / b;

  std::vector<Complex> q_prev = psi;
  std::vector<Complex> q_cur(size);
  std::vector<Complex> q_next(size);
  apply_scaled_generator(q_prev, g, inv_b, q_cur);

  std::vector<Complex> acc(size);
  for (int n = 0; n < size; ++n) acc[n] = bessel[0] * q_prev[n] + 2.0 * bessel[1] * q_cur[n];

  int terms = 2;
  for (int k = 2; k <= k_max; ++k) {
    apply_scaled_generator(q_cur, g, inv_b, q_next);
    const double coeff = 2.0 * bessel[k];
    for (int n = 0; n < size; ++n) {
      q_next[n] = 2.0 * q_next[n] + q_prev[n];
      acc[n] += coeff * q_next[n];
    }
    std::swap(q_prev, q_cur);
    std::swap(q_cur, q_next);
    ++terms;
    if (k > za && std::abs(bessel[k]) < 1e-18) break;
  }
  psi = std::move(acc);
  return terms;
}

}  // namespace

std::vector<double> bessel_j_sequence(double z, int k_max) {
  std::vector<double> out(k_max + 1, 0.0);
  if (z == 0.0) {
    out[0] = 1.0;
    return out;
  }
  const int start = std::max(k_max, static_cast<int>(z)) + 40 + static_cast<int>(10.0 * std::cbrt(z));
  std::vector<double> j(start + 2, 0.0);
  j[start + 1] = 0.0;
  j[start] = 1e-300;
  for (int k = start; k >= 1; --k) {
    j[k - 1] = (2.0 * k / z) * j[k] - j[k + 1];
    if (std::abs(j[k - 1]) > 1e250) {
      for (int m = k - 1; m <= start; ++m) j[m] *= 1e-250;
    }
  }
  double norm = j[0];
  for (int k = 2; k <= start; k += 2) norm += 2.0 * j[k];
  for (int k = 0; k <= k_max; ++k) out[k] = j[k] / norm;
  return out;
}

PropagationReport propagate_squeeze(std::vector<Complex>& psi, double tau, double tail_tol, int size_cap) {
  PropagationReport report;
  if (tau == 0.0) {
    report.final_size = static_cast<int>(psi.size());
    return report;
  }
  const double direction = tau < 0.0 ? -1.0 : 1.0;
  double remaining = std::abs(tau);
  std::vector<double> g = generator_couplings(static_cast<int>(psi.size()));

  while (remaining > 0.0) {
    const int size = static_cast<int>(psi.size());
    const double b = g[size - 1] + g[size + 1];
    const double z = std::min(kMaxStepArgument, remaining * b);
    const double step = z / b;

    std::vector<Complex> checkpoint = psi;
    report.chebyshev_terms += chebyshev_step(psi, g, b, direction * z);

    if (guard_mass(psi) > tail_tol) {
      if (size >= size_cap) {
        throw Error(ErrorKind::kTruncationInsufficient,
                    "squeeze propagation reached the Fock cap " + std::to_string(size_cap) +
                        " with guard-band mass above " + format_number(tail_tol));
      }
      const int grown = std::min(size_cap, static_cast<int>(std::ceil(size * 1.5)));
      psi = std::move(checkpoint);
      psi.resize(grown);
      g = generator_couplings(grown);
      ++report.regrowths;
      continue;
    }
    remaining -= step;
    if (remaining < 1e-15 * std::abs(tau)) remaining = 0.0;
  }
  report.final_size = static_cast<int>(psi.size());
  return report;
}

}  // namespace micromacro::detail
