#pragma once

#include <complex>
#include <vector>

namespace micromacro::detail {

/// J_0(z) .. J_k_max(z) by Miller's backward recurrence, normalized with
/// J_0 + 2 sum J_2k = 1.
std::vector<double> bessel_j_sequence(double z, int k_max);

struct PropagationReport {
  int final_size = 0;
  int chebyshev_terms = 0;
  int regrowths = 0;
};

/// Propagates psi under d/dtau psi = G psi, G = (a^2 - a^dag^2)/2, for
/// duration tau (negative tau applies the inverse squeeze). psi is resized as
/// the truncation grows; the result has the final working size.
PropagationReport propagate_squeeze(std::vector<std::complex<double>>& psi, double tau,
                                    double tail_tol, int size_cap);

}  // namespace micromacro::detail
