#pragma once

#include <complex>
#include <vector>

namespace micromacro {

/// Homodyne pattern functions for Fock-basis matrix elements, with
/// quadratures in units where the vacuum variance is 1/2.
///
/// For phases drawn uniformly from [0, pi) and outcomes x from p(x, theta),
///   <m|rho|n> = E[ f_mn(x) exp(i (m - n) theta) ].
/// Each f_mn is a polynomial combination of the Dawson function F:
///   f_mn(x) = P_mn(x) + Q_mn(x) F(x),
/// e.g. f_00 = 2 - 4 x F.
class PatternFunctions {
 public:
  explicit PatternFunctions(int n_cut);

  int n_cut() const { return n_cut_; }
  /// f_mn(x), real and symmetric in (m, n).
  double radial(int m, int n, double x) const;
  /// All f_mn(x) for m, n <= n_cut in one pass; out[(n_cut+1)*m + n].
  void radial_all(double x, std::vector<double>& out) const;
  /// f_mn(x) exp(i (m - n) theta).
  std::complex<double> operator()(int m, int n, double x, double theta) const;

 private:
  struct Entry {
    std::vector<double> p;
    std::vector<double> q;
  };
  const Entry& entry(int m, int n) const { return table_[m * (n_cut_ + 1) + n]; }
  static double horner(const std::vector<double>& c, double x);

  int n_cut_;
  std::vector<Entry> table_;
};

/// Dawson integral F(x) = exp(-x^2) int_0^x exp(t^2) dt.
double dawson(double x);

}  // namespace micromacro
