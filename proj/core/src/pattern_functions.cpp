#include "micromacro/pattern_functions.hpp"

#include <gsl/gsl_sf_dawson.h>

#include <cmath>
#include <string>

#include "micromacro/error.hpp"

namespace micromacro {

namespace {

using Poly = std::vector<double>;

Poly derivative(const Poly& p) {
  if (p.size() <= 1) return {0.0};
  Poly out(p.size() - 1);
  for (std::size_t k = 1; k < p.size(); ++k) out[k - 1] = k * p[k];
  return out;
}

Poly add(const Poly& a, const Poly& b, double scale_b = 1.0) {
  Poly out(std::max(a.size(), b.size()), 0.0);
  for (std::size_t k = 0; k < a.size(); ++k) out[k] += a[k];
  for (std::size_t k = 0; k < b.size(); ++k) out[k] += scale_b * b[k];
  return out;
}

Poly times_x(const Poly& p) {
  Poly out(p.size() + 1, 0.0);
  for (std::size_t k = 0; k < p.size(); ++k) out[k + 1] = p[k];
  return out;
}

double factorial(int n) { return std::tgamma(n + 1.0); }

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  return factorial(n) / (factorial(k) * factorial(n - k));
}

}  // namespace

double dawson(double x) { return gsl_sf_dawson(x); }

PatternFunctions::PatternFunctions(int n_cut) : n_cut_(n_cut) {
  if (n_cut < 1 || n_cut > 8) {
    throw Error(ErrorKind::kInvalidArgument, "pattern-function cutoff must lie in [1, 8], got " +
                                                 std::to_string(n_cut));
  }
  // k-th derivative of the Dawson function: F^(k) = P_k + Q_k F, from
  // F' = 1 - 2 x F.
  const int top = 2 * n_cut + 2;
  std::vector<Poly> dp(top + 1);
  std::vector<Poly> dq(top + 1);
  dp[0] = {0.0};
  dq[0] = {1.0};
  for (int k = 0; k < top; ++k) {
    dp[k + 1] = add(derivative(dp[k]), dq[k]);
    dq[k + 1] = add(derivative(dq[k]), times_x(dq[k]), -2.0);
  }

  // f_mn = 2 (-1)^d sum_i a_i F^(d+2i+1), the Fourier-space kernel
  // sqrt(lo!/hi!) (k/sqrt2)^d L_lo^(d)(k^2/2) turned into derivatives.
  table_.resize((n_cut + 1) * (n_cut + 1));
  for (int m = 0; m <= n_cut; ++m) {
    for (int n = 0; n <= n_cut; ++n) {
      const int lo = std::min(m, n);
      const int hi = std::max(m, n);
      const int d = hi - lo;
      Entry e{{0.0}, {0.0}};
      for (int i = 0; i <= lo; ++i) {
        const double a = std::sqrt(factorial(lo) / factorial(hi)) * std::pow(2.0, -0.5 * d) *
                         binomial(hi, lo - i) / (factorial(i) * std::pow(2.0, i));
        const double sign = d % 2 == 0 ? 1.0 : -1.0;
        const int order = d + 2 * i + 1;
        e.p = add(e.p, dp[order], 2.0 * sign * a);
        e.q = add(e.q, dq[order], 2.0 * sign * a);
      }
      table_[m * (n_cut + 1) + n] = std::move(e);
    }
  }
}

double PatternFunctions::horner(const std::vector<double>& c, double x) {
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
  return acc;
}

double PatternFunctions::radial(int m, int n, double x) const {
  if (m < 0 || n < 0 || m > n_cut_ || n > n_cut_) {
    throw Error(ErrorKind::kInvalidArgument, "pattern-function index beyond the cutoff");
  }
  const Entry& e = entry(m, n);
  return horner(e.p, x) + horner(e.q, x) * dawson(x);
}

void PatternFunctions::radial_all(double x, std::vector<double>& out) const {
  const double f = dawson(x);
  out.resize(table_.size());
  for (std::size_t k = 0; k < table_.size(); ++k) out[k] = horner(table_[k].p, x) + horner(table_[k].q, x) * f;
}

std::complex<double> PatternFunctions::operator()(int m, int n, double x, double theta) const {
  return radial(m, n, x) * std::polar(1.0, (m - n) * theta);
}

}  // namespace micromacro
