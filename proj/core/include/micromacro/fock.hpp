#pragma once

#include <complex>
#include <optional>
#include <span>
#include <vector>

#include "micromacro/entanglement.hpp"

namespace micromacro {

using Complex = std::complex<double>;

/// Largest Fock index any routine will allocate.
inline constexpr int kHardFockCap = 8192;
inline constexpr double kDefaultTailTolerance = 1e-10;
inline constexpr double kDefaultNormEpsilon = 1e-12;

/// Amplitudes of one bosonic mode over photon numbers 0..n_max().
struct FockAmplitudes {
  std::vector<Complex> amps;

  FockAmplitudes() = default;
  explicit FockAmplitudes(std::vector<Complex> a) : amps(std::move(a)) {}
  static FockAmplitudes zeros(int n_max) { return FockAmplitudes(std::vector<Complex>(n_max + 1)); }
  static FockAmplitudes number_state(int n, int n_max);

  int n_max() const { return static_cast<int>(amps.size()) - 1; }
  int size() const { return static_cast<int>(amps.size()); }
  bool empty() const { return amps.empty(); }
  double norm_squared() const;
  /// Amplitude at n, or zero past the stored range.
  Complex operator[](int n) const { return n >= 0 && n < size() ? amps[n] : Complex{}; }
};

struct SqueezeParams {
  double r = 0.0;
  int sign = +1;  // +1 applies S(r), -1 applies S(r)^-1 = S(-r)
};

struct SqueezeOptions {
  double tail_tol = kDefaultTailTolerance;
  /// Fixed output length. When unset the result is trimmed to the smallest
  /// length whose discarded tail is below tail_tol.
  std::optional<int> out_size;
  /// Tail mass the trimming may discard; defaults to tail_tol.
  std::optional<double> trim_tol;
};

struct LossChannelParams {
  double eta = 1.0;
  /// Largest Kraus order kept. Negative selects the smallest order whose
  /// neglected weight falls below tail_tol.
  int k_max = -1;
  double tail_tol = kDefaultTailTolerance;
};

/// One pure branch |1>_A (x) u + |0>_A (x) v of the two-mode state, with
/// classical weight. A list of branches represents sum_k w_k |b_k><b_k|.
struct EntangledBranch {
  double weight = 1.0;
  FockAmplitudes u;  // paired with |1>_A
  FockAmplitudes v;  // paired with |0>_A

  double trace() const { return weight * (u.norm_squared() + v.norm_squared()); }
};

struct LossOutput {
  std::vector<EntangledBranch> branches;
  double neglected_trace = 0.0;
  int k_max_used = 0;
};

/// Analytic tail mass of squeezed_vacuum(r) beyond index n_max (upper bound).
double squeezed_vacuum_tail(double r, int n_max);
/// Analytic tail mass of squeezed_one(r) beyond index n_max (upper bound).
double squeezed_one_tail(double r, int n_max);

/// Smallest even n_max for which both the squeezed vacuum and the squeezed
/// single photon leave less than tail_tol beyond it.
int truncation_for(double r, double tail_tol = kDefaultTailTolerance);

/// S(r)|0>, even support only, evaluated in log space.
FockAmplitudes squeezed_vacuum(double r, int n_max, double tail_tol = kDefaultTailTolerance);
/// S(r)|1>, odd support only, evaluated in log space.
FockAmplitudes squeezed_one(double r, int n_max, double tail_tol = kDefaultTailTolerance);

/// sum_n n |amps[n]|^2.
double mean_photon(const FockAmplitudes& state);

/// S(sign * r) applied to an arbitrary state by Chebyshev propagation of
/// d/dr psi = ((a^2 - a^dag^2) / 2) psi on an adaptively sized truncation.
FockAmplitudes apply_squeeze(const FockAmplitudes& state, const SqueezeParams& params,
                             const SqueezeOptions& options = {});

/// Photon loss with transmission eta applied to mode B of one branch.
/// Branch k carries E_k u and E_k v with
/// <n-k|E_k|n> = sqrt(C(n,k) eta^(n-k) (1-eta)^k).
LossOutput loss_on_branch(const EntangledBranch& branch, const LossChannelParams& params);

/// Loss with transmission eta on the two-level mode A: the |1>_A component
/// survives with amplitude sqrt(eta) and otherwise decays into |0>_A.
std::vector<EntangledBranch> loss_on_mode_a(const EntangledBranch& branch, double eta);

/// Accumulates the {0,1}_A x {0,1}_B block of sum_k w_k |b_k><b_k|.
ProjectedDensityMatrix branches_to_projected(std::span<const EntangledBranch> branches);

/// Total trace of a branch ensemble.
double ensemble_trace(std::span<const EntangledBranch> branches);

/// Removes branches whose weighted trace is below threshold and returns the
/// removed trace.
double prune_branches(std::vector<EntangledBranch>& branches, double threshold = 1e-14);

}  // namespace micromacro
