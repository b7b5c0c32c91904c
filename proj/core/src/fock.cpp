#include "micromacro/fock.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "micromacro/error.hpp"
#include "squeeze_propagator.hpp"

namespace micromacro {

namespace {

double log_cosh(double r) {
  // log(cosh r) without overflow for large r.
  return r + std::log1p(std::exp(-2.0 * r)) - std::numbers::ln2;
}

// log|<2k|S(r)|0>|.
double log_vacuum_coefficient(double r, int k) {
  return 0.5 * std::lgamma(2.0 * k + 1.0) - k * std::numbers::ln2 - std::lgamma(k + 1.0) +
         k * std::log(std::tanh(r)) - 0.5 * log_cosh(r);
}

// log|<2k+1|S(r)|1>|.
double log_one_coefficient(double r, int k) {
  return 0.5 * std::lgamma(2.0 * k + 2.0) - k * std::numbers::ln2 - std::lgamma(k + 1.0) +
         k * std::log(std::tanh(r)) - 1.5 * log_cosh(r);
}

void check_squeeze_arguments(double r, int n_max) {
  if (!(r >= 0.0) || !std::isfinite(r)) {
    throw Error(ErrorKind::kInvalidArgument, "squeezing parameter must be finite and >= 0");
  }
  if (n_max < 1 || n_max > kHardFockCap) {
    throw Error(ErrorKind::kInvalidArgument,
                "n_max must lie in [1, " + std::to_string(kHardFockCap) + "], got " + std::to_string(n_max));
  }
}

void check_eta(double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) {
    throw Error(ErrorKind::kInvalidEta, "transmission must lie in [0, 1], got " + format_number(eta));
  }
}

// Tail bound sum_{k>=k0} c_k^2 <= c_{k0}^2 / (1 - rho) where rho bounds the
// ratio c_{k+1}^2 / c_k^2 for all k >= k0. Returns +inf if rho >= 1.
double geometric_tail(double log_first, double rho) {
  if (rho >= 1.0) return std::numeric_limits<double>::infinity();
  return std::exp(2.0 * log_first) / (1.0 - rho);
}

}  // namespace

FockAmplitudes FockAmplitudes::number_state(int n, int n_max) {
  FockAmplitudes state = zeros(std::max(n, n_max));
  state.amps[n] = 1.0;
  return state;
}

double FockAmplitudes::norm_squared() const {
  double total = 0.0;
  for (const Complex& a : amps) total += std::norm(a);
  return total;
}

double squeezed_vacuum_tail(double r, int n_max) {
  if (r == 0.0) return 0.0;
  const int k0 = n_max / 2 + 1;  // first even index 2*k0 beyond n_max
  const double t2 = std::tanh(r) * std::tanh(r);
  return geometric_tail(log_vacuum_coefficient(r, k0), t2);
}

double squeezed_one_tail(double r, int n_max) {
  if (r == 0.0) return n_max >= 1 ? 0.0 : 1.0;
  // first odd index 2*k0+1 beyond n_max
  const int k0 = n_max % 2 == 0 ? n_max / 2 : (n_max + 1) / 2;
  const double t2 = std::tanh(r) * std::tanh(r);
  const double rho = (2.0 * k0 + 3.0) / (2.0 * k0 + 2.0) * t2;
  return geometric_tail(log_one_coefficient(r, k0), rho);
}

int truncation_for(double r, double tail_tol) {
  check_squeeze_arguments(r, 2);
  for (int n_max = 2; n_max <= kHardFockCap; n_max += 2) {
    if (squeezed_vacuum_tail(r, n_max) < tail_tol && squeezed_one_tail(r, n_max) < tail_tol) return n_max;
  }
  throw Error(ErrorKind::kTruncationInsufficient,
              "r = " + format_number(r) + " needs more than " + std::to_string(kHardFockCap) +
                  " Fock levels for tail tolerance " + format_number(tail_tol));
}

FockAmplitudes squeezed_vacuum(double r, int n_max, double tail_tol) {
  check_squeeze_arguments(r, n_max);
  const double tail = squeezed_vacuum_tail(r, n_max);
  if (tail > tail_tol) {
    throw Error(ErrorKind::kTruncationInsufficient, "squeezed vacuum at r = " + format_number(r) +
                                                        " leaves tail " + format_number(tail) +
                                                        " beyond n_max = " + std::to_string(n_max));
  }
  FockAmplitudes state = FockAmplitudes::zeros(n_max);
  if (r == 0.0) {
    state.amps[0] = 1.0;
    return state;
  }
  for (int k = 0; 2 * k <= n_max; ++k) {
    const double magnitude = std::exp(log_vacuum_coefficient(r, k));
    state.amps[2 * k] = k % 2 == 0 ? magnitude : -magnitude;
  }
  return state;
}

FockAmplitudes squeezed_one(double r, int n_max, double tail_tol) {
  check_squeeze_arguments(r, n_max);
  const double tail = squeezed_one_tail(r, n_max);
  if (tail > tail_tol) {
    throw Error(ErrorKind::kTruncationInsufficient, "squeezed single photon at r = " + format_number(r) +
                                                        " leaves tail " + format_number(tail) +
                                                        " beyond n_max = " + std::to_string(n_max));
  }
  FockAmplitudes state = FockAmplitudes::zeros(n_max);
  if (r == 0.0) {
    state.amps[1] = 1.0;
    return state;
  }
  for (int k = 0; 2 * k + 1 <= n_max; ++k) {
    const double magnitude = std::exp(log_one_coefficient(r, k));
    state.amps[2 * k + 1] = k % 2 == 0 ? magnitude : -magnitude;
  }
  return state;
}

double mean_photon(const FockAmplitudes& state) {
  double total = 0.0;
  for (int n = 1; n < state.size(); ++n) total += n * std::norm(state.amps[n]);
  return total;
}

FockAmplitudes apply_squeeze(const FockAmplitudes& state, const SqueezeParams& params,
                             const SqueezeOptions& options) {
  if (!(params.r >= 0.0) || !std::isfinite(params.r)) {
    throw Error(ErrorKind::kInvalidArgument, "squeezing parameter must be finite and >= 0");
  }
  if (params.sign != 1 && params.sign != -1) {
    throw Error(ErrorKind::kInvalidArgument, "squeeze sign must be +1 or -1");
  }

  int support = state.size();
  while (support > 1 && state.amps[support - 1] == Complex{}) --support;

  std::vector<Complex> psi(state.amps.begin(), state.amps.begin() + std::max(support, 1));
  if (params.r > 0.0) {
    // Start with the input inside the unguarded region and at least the
    // width of a squeezed single photon.
    const int analytic = truncation_for(std::min(params.r, 3.5), options.tail_tol);
    int working = std::max(static_cast<int>(std::ceil(1.3 * support)) + 16,
                           static_cast<int>(std::ceil(1.25 * analytic)));
    working = std::min(working, kHardFockCap);
    if (working < support) {
      throw Error(ErrorKind::kTruncationInsufficient, "input support exceeds the Fock cap");
    }
    psi.resize(working);
    detail::propagate_squeeze(psi, params.sign * params.r, options.tail_tol, kHardFockCap);
  }

  if (options.out_size) {
    psi.resize(*options.out_size);
    return FockAmplitudes(std::move(psi));
  }
  // Trim to the smallest length whose discarded tail is below tail_tol.
  const double trim_tol = options.trim_tol.value_or(options.tail_tol);
  double tail = 0.0;
  int keep = static_cast<int>(psi.size());
  while (keep > 1 && tail + std::norm(psi[keep - 1]) < trim_tol) {
    tail += std::norm(psi[keep - 1]);
    --keep;
  }
  psi.resize(keep);
  return FockAmplitudes(std::move(psi));
}

LossOutput loss_on_branch(const EntangledBranch& branch, const LossChannelParams& params) {
  check_eta(params.eta);
  LossOutput out;
  if (params.eta == 1.0) {
    out.branches.push_back(branch);
    return out;
  }
  const int n_top = std::max(branch.u.n_max(), branch.v.n_max());
  const int limit = params.k_max < 0 ? n_top : std::min(params.k_max, n_top);
  const double input_trace = branch.trace();
  const double log_eta = std::log(params.eta);
  const double log_loss = std::log1p(-params.eta);

  // Precompute lgamma(n + 1) once; it dominates the coefficient cost.
  std::vector<double> log_factorial(n_top + 2);
  for (int n = 0; n <= n_top + 1; ++n) log_factorial[n] = std::lgamma(n + 1.0);

  auto kraus = [&](const FockAmplitudes& in, int k) {
    FockAmplitudes result = FockAmplitudes::zeros(std::max(in.n_max() - k, 0));
    for (int n = k; n <= in.n_max(); ++n) {
      if (in.amps[n] == Complex{}) continue;
      double coefficient;
      if (params.eta == 0.0) {
        coefficient = n == k ? 1.0 : 0.0;
      } else {
        const double log_c = log_factorial[n] - log_factorial[k] - log_factorial[n - k] +
                             (n - k) * log_eta + k * log_loss;
        coefficient = std::exp(0.5 * log_c);
      }
      result.amps[n - k] = coefficient * in.amps[n];
    }
    return result;
  };

  double captured = 0.0;
  int k = 0;
  for (; k <= limit; ++k) {
    EntangledBranch next;
    next.weight = branch.weight;
    next.u = k <= branch.u.n_max() ? kraus(branch.u, k) : FockAmplitudes::zeros(0);
    next.v = k <= branch.v.n_max() ? kraus(branch.v, k) : FockAmplitudes::zeros(0);
    captured += next.trace();
    out.branches.push_back(std::move(next));
    if (params.k_max < 0 && input_trace - captured < params.tail_tol) break;
  }
  out.k_max_used = std::min(k, limit);
  // With every order up to n_top kept the channel is exact; what remains of
  // input - captured is rounding.
  out.neglected_trace = out.k_max_used == n_top ? 0.0 : std::max(input_trace - captured, 0.0);
  if (out.neglected_trace > params.tail_tol) {
    throw Error(ErrorKind::kTailToleranceUnreachable,
                "loss channel with k_max = " + std::to_string(out.k_max_used) + " neglects trace " +
                    format_number(out.neglected_trace) + " > " + format_number(params.tail_tol));
  }
  return out;
}

std::vector<EntangledBranch> loss_on_mode_a(const EntangledBranch& branch, double eta) {
  check_eta(eta);
  if (eta == 1.0) return {branch};
  EntangledBranch kept = branch;
  for (Complex& a : kept.u.amps) a *= std::sqrt(eta);
  EntangledBranch lost;
  lost.weight = branch.weight;
  lost.u = FockAmplitudes::zeros(0);
  lost.v = branch.u;
  for (Complex& a : lost.v.amps) a *= std::sqrt(1.0 - eta);
  return {std::move(kept), std::move(lost)};
}

ProjectedDensityMatrix branches_to_projected(std::span<const EntangledBranch> branches) {
  ProjectedDensityMatrix rho;
  for (const EntangledBranch& b : branches) {
    // amplitude of |i_A j_B>, flat index 2 i + j
    const std::array<Complex, 4> amp{b.v[0], b.v[1], b.u[0], b.u[1]};
    for (int row = 0; row < 4; ++row) {
      for (int col = 0; col < 4; ++col) rho.matrix(row, col) += b.weight * amp[row] * std::conj(amp[col]);
    }
  }
  return rho;
}

double ensemble_trace(std::span<const EntangledBranch> branches) {
  double total = 0.0;
  for (const EntangledBranch& b : branches) total += b.trace();
  return total;
}

double prune_branches(std::vector<EntangledBranch>& branches, double threshold) {
  double dropped = 0.0;
  std::erase_if(branches, [&](const EntangledBranch& b) {
    const double t = b.trace();
    if (t < threshold) {
      dropped += t;
      return true;
    }
    return false;
  });
  return dropped;
}

}  // namespace micromacro
