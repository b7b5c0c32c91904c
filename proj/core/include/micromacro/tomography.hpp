#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "micromacro/entanglement.hpp"
#include "micromacro/fock.hpp"
#include "micromacro/phase_space.hpp"

namespace micromacro {

/// One joint homodyne outcome. Phases lie in [0, pi); quadratures use vacuum
/// variance 1/2, x_theta = X cos(theta) + P sin(theta).
struct QuadratureSample {
  double theta_a = 0.0;
  double theta_b = 0.0;
  double x_a = 0.0;
  double x_b = 0.0;
};

enum class PhasePolicy {
  kUniformRandom,  // independent uniform phases per sample
  kFixedGrid,      // kGridPhases equally spaced phases per mode, cycling all pairs
};
inline constexpr int kGridPhases = 16;

std::string_view to_string(PhasePolicy policy);
PhasePolicy parse_phase_policy(std::string_view name);

struct TomographyRecord {
  std::vector<QuadratureSample> samples;
  std::uint64_t seed = 0;
  PhasePolicy policy = PhasePolicy::kUniformRandom;
  /// Free-form key/value snapshot of the configuration that produced it.
  std::vector<std::pair<std::string, std::string>> config;
};

using JointDensity = std::function<double(double, double)>;

/// p(x_A, x_B) at fixed phases from a branch ensemble, via Hermite functions.
JointDensity joint_pdf(const std::vector<EntangledBranch>& branches, double theta_a, double theta_b);
/// p(x_A, x_B) at fixed phases from a Wigner function, by marginalization.
JointDensity joint_pdf(const GaussianPolyWigner& w, double theta_a, double theta_b);

/// Normalized Hermite functions psi_0..psi_n_max at x.
void hermite_functions(double x, int n_max, std::vector<double>& out);

struct SamplingOptions {
  std::size_t n_samples = 0;
  PhasePolicy policy = PhasePolicy::kUniformRandom;
  std::uint64_t seed = 0;
  int threads = 1;  // 0 = hardware concurrency; output does not depend on it
};

/// Draws outcomes by inverse-CDF sampling of the exact marginal p(x_A) and
/// then of p(x_B | x_A). Blocks of kSampleBlock samples use independent
/// generators seeded from (seed, block index), so the record is identical for
/// any thread count.
inline constexpr std::size_t kSampleBlock = 4096;
TomographyRecord sample(const GaussianPolyWigner& w, const SamplingOptions& options);

/// Inverse of the cumulative distribution of a nonnegative density, solved by
/// safeguarded Newton iteration. u in [0, 1).
double inverse_cdf(const GaussianPoly1D& density, double u);

struct ReconstructionOptions {
  int n_cut = 3;                  // populations reported up to this photon number
  bool check_conditioning = true;
  int conditioning_harmonics = 8;
  int threads = 1;
};

struct Reconstruction {
  ProjectedDensityMatrix estimate;
  Eigen::Matrix4d se_real = Eigen::Matrix4d::Zero();  // standard error of Re(element)
  Eigen::Matrix4d se_imag = Eigen::Matrix4d::Zero();  // standard error of Im(element)
  /// Covariance of the 16 real parameters (4 diagonals, then Re/Im of the six
  /// upper-triangle entries in row-major order), already divided by N.
  Eigen::Matrix<double, 16, 16> covariance = Eigen::Matrix<double, 16, 16>::Zero();
  double concurrence = 0.0;
  double concurrence_se = 0.0;
  /// Two-mode populations P(m, n) for m, n <= n_cut, row-major.
  std::vector<double> populations;
  std::vector<double> population_se;
  double mass_beyond_cutoff = 0.0;  // 1 - sum of populations
  double max_phase_moment = 0.0;
  std::size_t n_samples = 0;
};

/// Pattern-function estimate of the {0,1} x {0,1} block with standard errors.
/// Throws kIllConditioned when the recorded phases are not close enough to
/// uniform for the estimator (e.g. a single fixed phase pair).
Reconstruction reconstruct(const TomographyRecord& record, const ReconstructionOptions& options = {});

/// Largest |mean exp(2i (j theta_A + k theta_B))| over 0 < |j|, |k| <= harmonics
/// (and the single-mode moments).
double phase_moment_residual(const std::vector<QuadratureSample>& samples, int harmonics);

/// Mapping between the 4x4 Hermitian block and its 16 real parameters.
Eigen::Matrix<double, 16, 1> to_real_parameters(const Eigen::Matrix4cd& m);
Eigen::Matrix4cd from_real_parameters(const Eigen::Matrix<double, 16, 1>& p);

/// CSV serialization: '#' metadata lines (schema, seed, policy, config), a
/// header "theta_A,theta_B,x_A,x_B", then one sample per line with fixed
/// decimal precision.
inline constexpr std::string_view kRecordSchema = "micromacro-tomography-record v1";
void write_record_csv(std::ostream& out, const TomographyRecord& record);
TomographyRecord read_record_csv(std::istream& in);

}  // namespace micromacro
