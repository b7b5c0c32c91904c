#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "micromacro/entanglement.hpp"
#include "micromacro/error.hpp"
#include "micromacro/fock.hpp"
#include "micromacro/phase_space.hpp"

namespace micromacro {

enum class Engine {
  kFock,
  kPhaseSpace,
  kBoth,
  kAuto,  // phase space above kAutoPhaseSpaceThreshold, Fock below
};

inline constexpr double kAutoPhaseSpaceThreshold = 30.0;
/// Elementwise tolerance between the two engines when both run.
inline constexpr double kEngineAgreementTolerance = 1e-6;

std::string_view to_string(Engine engine);
/// Parses "fock", "phase_space", "both" or "auto".
Engine parse_engine(std::string_view name);

struct ExperimentConfig {
  std::optional<double> r;         // squeezing parameter
  std::optional<double> target_n;  // alternatively, the mean photon number n
  double eta1 = 1.0;
  double eta = 1.0;
  double eta2 = 1.0;
  Engine engine = Engine::kAuto;
  bool loss_on_a = false;  // apply eta2 to mode A as well
  double tail_tol = kDefaultTailTolerance;
  std::uint64_t seed = 0;  // tomography only

  /// Throws kInvalidConfig / kInvalidEta / kTargetBelowMinimum.
  void validate() const;
  /// r, solving for it when target_n is set.
  double resolved_r() const;
};

struct EngineDiagnostics {
  Engine engine_used = Engine::kFock;
  int truncation = 0;           // Fock cutoff of the amplified state
  int desqueeze_rows = 0;       // entries of the de-squeezed vectors kept
  bool adjoint_desqueeze = false;
  int kraus_order_eta = 0;      // largest Kraus order used for the middle loss
  int kraus_order_eta2 = 0;
  int branch_count = 0;
  double dropped_mass = 0.0;    // pruned branches
  double neglected_trace = 0.0; // truncation and Kraus tails
  std::optional<double> disagreement;  // max elementwise |rho_fock - rho_wigner|
};

struct ExperimentResult {
  ProjectedDensityMatrix rho_p;
  ConcurrenceResult concurrence;
  double success_prob = 0.0;
  double r = 0.0;
  double n0 = 0.0;
  double n1 = 0.0;
  double n = 0.0;
  EngineDiagnostics diagnostics;
};

/// Mean photon number (n0 + n1) / 2 = 2 sinh^2 r + 1/2 after amplification.
double mean_photon_number(double r);
/// Inverse of mean_photon_number. Throws kTargetBelowMinimum for n < 1/2.
double solve_r_for_n(double target_n);

/// Memo of the amplified number states S(r)|j>, shared across runs with the
/// same r. Thread-safe.
class SqueezeColumnCache {
 public:
  std::shared_ptr<const FockAmplitudes> get(double r, int j, int length, double tail_tol);

 private:
  struct Key {
    double r;
    int j;
    int length;
    double tail_tol;
    auto operator<=>(const Key&) const = default;
  };
  std::mutex mutex_;
  std::map<Key, std::shared_ptr<const FockAmplitudes>> columns_;
};

/// Runs eta1 -> S(r) -> eta -> S^-1(r) -> eta2 -> projection.
ExperimentResult run(const ExperimentConfig& config, SqueezeColumnCache* cache = nullptr);

/// Fock engine only; returns the projected block and fills diagnostics.
ProjectedDensityMatrix run_fock(const ExperimentConfig& config, EngineDiagnostics& diagnostics,
                                SqueezeColumnCache* cache = nullptr);
/// Phase-space engine only.
ProjectedDensityMatrix run_phase_space(const ExperimentConfig& config);

/// Final two-mode Wigner function of the pipeline.
GaussianPolyWigner final_wigner(const ExperimentConfig& config);
/// Final state as a branch ensemble with full-length mode-B vectors (no
/// projection shortcut), truncated at a trace tolerance of at most 1e-18 so
/// that amplitudes, not just probabilities, are accurate. Intended for
/// moderate r, e.g. tomography.
std::vector<EntangledBranch> final_branches(const ExperimentConfig& config);

enum class SweepAxis { kN, kEta, kEta12 };
std::string_view to_string(SweepAxis axis);
SweepAxis parse_sweep_axis(std::string_view name);

struct SweepRow {
  double value = 0.0;
  ExperimentConfig config;
  std::optional<ExperimentResult> result;
  std::optional<ErrorKind> error_kind;
  std::string error;
  double wall_time = 0.0;  // seconds
};

/// One run per value, rows in input order. Errors are recorded per row and do
/// not stop the sweep. threads = 0 uses the hardware concurrency.
std::vector<SweepRow> sweep(const ExperimentConfig& base, SweepAxis axis, const std::vector<double>& values,
                            int threads = 0);

/// Applies one sweep value to a base config.
ExperimentConfig with_axis_value(const ExperimentConfig& base, SweepAxis axis, double value);

}  // namespace micromacro
