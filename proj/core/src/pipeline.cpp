#include "micromacro/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <string>
#include <thread>

namespace micromacro {

namespace {

// Beyond this many de-squeezed rows the per-row propagations get wider than
// the Fock cap allows, so the branches are de-squeezed directly instead.
constexpr int kMaxAdjointRows = 24;
constexpr double kPruneThreshold = 1e-14;

void check_unit_interval(double value, const char* name) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw Error(ErrorKind::kInvalidEta,
                std::string(name) + " must lie in [0, 1], got " + format_number(value));
  }
}

// Upper bound on the weight that rows j >= m can feed into photon numbers 0
// and 1 after loss with transmission 1 - q:
// sum_{j>=m} q^j + j q^(j-1) (1 - q).
double row_tail_bound(double q, int m) {
  if (q == 0.0) return 0.0;
  const double geometric = std::pow(q, m) / (1.0 - q);
  const double derivative = m * std::pow(q, m - 1) / (1.0 - q) + std::pow(q, m) / ((1.0 - q) * (1.0 - q));
  return geometric + (1.0 - q) * derivative;
}

int rows_needed(double eta2, double tail_tol, int cap) {
  if (eta2 == 1.0) return 2;
  if (eta2 == 0.0) return cap;
  const double q = 1.0 - eta2;
  int m = 2;
  while (m < cap && row_tail_bound(q, m) > tail_tol) ++m;
  return m;
}

FockAmplitudes scaled(const FockAmplitudes& state, double factor) {
  FockAmplitudes out = state;
  for (Complex& a : out.amps) a *= factor;
  return out;
}

FockAmplitudes resized(const FockAmplitudes& state, int length) {
  FockAmplitudes out = state;
  out.amps.resize(length);
  return out;
}

// Branches after eta1 -> S(r) -> eta, with eta1 applied analytically to the
// single-photon input.
std::vector<EntangledBranch> amplified_branches(const ExperimentConfig& config, double r, int truncation,
                                                EngineDiagnostics& diagnostics) {
  const FockAmplitudes s0 = squeezed_vacuum(r, truncation, config.tail_tol);
  const FockAmplitudes s1 = squeezed_one(r, truncation, config.tail_tol);
  const double half = std::sqrt(0.5);

  std::vector<EntangledBranch> input;
  input.push_back({1.0, scaled(s0, half), scaled(s1, half * std::sqrt(config.eta1))});
  if (config.eta1 < 1.0) {
    input.push_back({1.0, FockAmplitudes::zeros(0), scaled(s0, half * std::sqrt(1.0 - config.eta1))});
  }
  diagnostics.neglected_trace += squeezed_vacuum_tail(r, truncation) + squeezed_one_tail(r, truncation);

  std::vector<EntangledBranch> out;
  for (const EntangledBranch& b : input) {
    LossOutput lossy = loss_on_branch(b, {config.eta, -1, config.tail_tol});
    diagnostics.kraus_order_eta = std::max(diagnostics.kraus_order_eta, lossy.k_max_used);
    diagnostics.neglected_trace += lossy.neglected_trace;
    for (EntangledBranch& k : lossy.branches) out.push_back(std::move(k));
  }
  diagnostics.dropped_mass += prune_branches(out, kPruneThreshold);
  return out;
}

// eta2 and the optional mode-A loss on already de-squeezed branches.
std::vector<EntangledBranch> detection_losses(const std::vector<EntangledBranch>& branches,
                                              const ExperimentConfig& config, EngineDiagnostics& diagnostics) {
  std::vector<EntangledBranch> out;
  for (const EntangledBranch& b : branches) {
    LossOutput lossy = loss_on_branch(b, {config.eta2, -1, config.tail_tol});
    diagnostics.kraus_order_eta2 = std::max(diagnostics.kraus_order_eta2, lossy.k_max_used);
    diagnostics.neglected_trace += lossy.neglected_trace;
    for (EntangledBranch& k : lossy.branches) {
      if (config.loss_on_a) {
        for (EntangledBranch& a : loss_on_mode_a(k, config.eta2)) out.push_back(std::move(a));
      } else {
        out.push_back(std::move(k));
      }
    }
  }
  diagnostics.dropped_mass += prune_branches(out, kPruneThreshold);
  return out;
}

}  // namespace

std::string_view to_string(Engine engine) {
  switch (engine) {
    case Engine::kFock: return "fock";
    case Engine::kPhaseSpace: return "phase_space";
    case Engine::kBoth: return "both";
    case Engine::kAuto: return "auto";
  }
  return "unknown";
}

Engine parse_engine(std::string_view name) {
  if (name == "fock") return Engine::kFock;
  if (name == "phase_space" || name == "phase-space") return Engine::kPhaseSpace;
  if (name == "both") return Engine::kBoth;
  if (name == "auto") return Engine::kAuto;
  throw Error(ErrorKind::kInvalidConfig, "unknown engine '" + std::string(name) + "'");
}

void ExperimentConfig::validate() const {
  if (r.has_value() == target_n.has_value()) {
    throw Error(ErrorKind::kInvalidConfig, "exactly one of r and target_n must be set");
  }
  if (r && (!(*r >= 0.0) || !std::isfinite(*r))) {
    throw Error(ErrorKind::kInvalidConfig, "r must be finite and >= 0, got " + format_number(*r));
  }
  if (target_n && !(*target_n >= 0.5)) {
    throw Error(ErrorKind::kTargetBelowMinimum,
                "target n must be at least 1/2 (the value at r = 0), got " + format_number(*target_n));
  }
  check_unit_interval(eta1, "eta1");
  check_unit_interval(eta, "eta");
  check_unit_interval(eta2, "eta2");
  if (!(tail_tol > 0.0 && tail_tol < 1e-2)) {
    throw Error(ErrorKind::kInvalidConfig, "tail tolerance must lie in (0, 1e-2)");
  }
}

double ExperimentConfig::resolved_r() const {
  validate();
  return r ? *r : solve_r_for_n(*target_n);
}

double mean_photon_number(double r) {
  const double s = std::sinh(r);
  return 2.0 * s * s + 0.5;
}

double solve_r_for_n(double target_n) {
  if (!(target_n >= 0.5) || !std::isfinite(target_n)) {
    throw Error(ErrorKind::kTargetBelowMinimum,
                "target n must be finite and at least 1/2, got " + format_number(target_n));
  }
  return std::asinh(std::sqrt((target_n - 0.5) / 2.0));
}

std::shared_ptr<const FockAmplitudes> SqueezeColumnCache::get(double r, int j, int length, double tail_tol) {
  const Key key{r, j, length, tail_tol};
  {
    std::lock_guard lock(mutex_);
    if (auto it = columns_.find(key); it != columns_.end()) return it->second;
  }
  SqueezeOptions options;
  options.tail_tol = tail_tol;
  options.out_size = length;
  auto column = std::make_shared<const FockAmplitudes>(
      apply_squeeze(FockAmplitudes::number_state(j, j), {r, +1}, options));
  std::lock_guard lock(mutex_);
  return columns_.emplace(key, std::move(column)).first->second;
}

ProjectedDensityMatrix run_fock(const ExperimentConfig& config, EngineDiagnostics& diagnostics,
                                SqueezeColumnCache* cache) {
  const double r = config.resolved_r();
  diagnostics.engine_used = Engine::kFock;
  const int truncation = truncation_for(r, config.tail_tol);
  diagnostics.truncation = truncation;

  std::vector<EntangledBranch> middle = amplified_branches(config, r, truncation, diagnostics);

  int length = 1;
  for (const EntangledBranch& b : middle) length = std::max({length, b.u.size(), b.v.size()});
  const int rows = std::min(rows_needed(config.eta2, config.tail_tol, length), length);
  diagnostics.desqueeze_rows = rows;
  if (rows < length) diagnostics.neglected_trace += row_tail_bound(1.0 - config.eta2, rows);

  // Only the first `rows` entries of S^-1 u survive the eta2 projection.
  // S is real orthogonal, so (S^-1 u)[j] = <S|j>, u> and one column per row
  // serves every branch.
  std::vector<EntangledBranch> desqueezed;
  desqueezed.reserve(middle.size());
  const bool adjoint = rows <= kMaxAdjointRows && rows <= 2 * static_cast<int>(middle.size());
  diagnostics.adjoint_desqueeze = adjoint;
  if (adjoint) {
    SqueezeColumnCache local;
    SqueezeColumnCache& columns = cache ? *cache : local;
    std::vector<std::shared_ptr<const FockAmplitudes>> column(rows);
    for (int j = 0; j < rows; ++j) {
      if (j == 0) {
        column[j] = std::make_shared<const FockAmplitudes>(squeezed_vacuum(r, truncation, config.tail_tol));
      } else if (j == 1) {
        column[j] = std::make_shared<const FockAmplitudes>(squeezed_one(r, truncation, config.tail_tol));
      } else {
        column[j] = columns.get(r, j, length, config.tail_tol);
      }
    }
    auto project = [&](const FockAmplitudes& x) {
      FockAmplitudes out = FockAmplitudes::zeros(rows - 1);
      for (int j = 0; j < rows; ++j) {
        const FockAmplitudes& c = *column[j];
        const int top = std::min(c.size(), x.size());
        Complex acc{};
        for (int n = 0; n < top; ++n) acc += c.amps[n] * x.amps[n];
        out.amps[j] = acc;
      }
      return out;
    };
    for (const EntangledBranch& b : middle) desqueezed.push_back({b.weight, project(b.u), project(b.v)});
  } else {
    SqueezeOptions options;
    options.tail_tol = config.tail_tol;
    options.out_size = rows;
    for (const EntangledBranch& b : middle) {
      auto desqueeze = [&](const FockAmplitudes& x) {
        if (x.empty()) return FockAmplitudes::zeros(rows - 1);
        return apply_squeeze(x, {r, -1}, options);
      };
      desqueezed.push_back({b.weight, desqueeze(b.u), desqueeze(b.v)});
    }
  }

  std::vector<EntangledBranch> final_state = detection_losses(desqueezed, config, diagnostics);
  diagnostics.branch_count = static_cast<int>(final_state.size());
  return branches_to_projected(final_state);
}

GaussianPolyWigner final_wigner(const ExperimentConfig& config) {
  const double r = config.resolved_r();
  GaussianPolyWigner w = initial_wigner();
  w = loss_convolve(w, config.eta1);
  w = squeeze_rescale(w, r, +1);
  w = loss_convolve(w, config.eta);
  w = squeeze_rescale(w, r, -1);
  w = loss_convolve(w, config.eta2);
  if (config.loss_on_a) w = loss_convolve(w, config.eta2, Mode::kA);
  return w;
}

ProjectedDensityMatrix run_phase_space(const ExperimentConfig& config) {
  return extract_projected(final_wigner(config));
}

std::vector<EntangledBranch> final_branches(const ExperimentConfig& base) {
  // Amplitude errors enter quadrature densities linearly, so the trace
  // tolerance is tightened until amplitudes are resolved to ~1e-9.
  ExperimentConfig config = base;
  config.tail_tol = std::min(base.tail_tol, 1e-18);
  const double r = config.resolved_r();
  EngineDiagnostics diagnostics;
  const int truncation = truncation_for(r, config.tail_tol);
  std::vector<EntangledBranch> middle = amplified_branches(config, r, truncation, diagnostics);
  // Keep amplitudes down to ~1e-10 so quadrature densities built from these
  // vectors are accurate well beyond the trace tolerance.
  SqueezeOptions options;
  options.tail_tol = config.tail_tol;
  options.trim_tol = 1e-20;
  std::vector<EntangledBranch> desqueezed;
  desqueezed.reserve(middle.size());
  for (const EntangledBranch& b : middle) {
    auto desqueeze = [&](const FockAmplitudes& x) {
      if (x.empty()) return FockAmplitudes::zeros(0);
      return apply_squeeze(x, {r, -1}, options);
    };
    desqueezed.push_back({b.weight, desqueeze(b.u), desqueeze(b.v)});
  }
  // Common length so that later Hermite sums see aligned vectors.
  int length = 1;
  for (const EntangledBranch& b : desqueezed) length = std::max({length, b.u.size(), b.v.size()});
  for (EntangledBranch& b : desqueezed) {
    b.u = resized(b.u, length);
    b.v = resized(b.v, length);
  }
  return detection_losses(desqueezed, config, diagnostics);
}

ExperimentResult run(const ExperimentConfig& config, SqueezeColumnCache* cache) {
  config.validate();
  ExperimentResult result;
  result.r = config.resolved_r();
  const double s2 = std::sinh(result.r) * std::sinh(result.r);
  result.n0 = s2;
  result.n1 = 1.0 + 3.0 * s2;
  result.n = 0.5 * (result.n0 + result.n1);

  Engine engine = config.engine;
  if (engine == Engine::kAuto) {
    const bool lossy_zero = config.eta1 == 0.0 || config.eta == 0.0 || config.eta2 == 0.0;
    engine = result.n > kAutoPhaseSpaceThreshold && !lossy_zero ? Engine::kPhaseSpace : Engine::kFock;
  }

  switch (engine) {
    case Engine::kFock:
      result.rho_p = run_fock(config, result.diagnostics, cache);
      break;
    case Engine::kPhaseSpace:
      result.rho_p = run_phase_space(config);
      result.diagnostics.engine_used = Engine::kPhaseSpace;
      break;
    case Engine::kBoth:
    case Engine::kAuto: {
      const ProjectedDensityMatrix fock = run_fock(config, result.diagnostics, cache);
      result.rho_p = run_phase_space(config);
      result.diagnostics.engine_used = Engine::kBoth;
      result.diagnostics.disagreement = (fock.matrix - result.rho_p.matrix).cwiseAbs().maxCoeff();
      break;
    }
  }
  result.concurrence = concurrence_xstate(result.rho_p, OffXPolicy::kRequireX);
  result.success_prob = success_probability(result.rho_p);
  return result;
}

std::string_view to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kN: return "n";
    case SweepAxis::kEta: return "eta";
    case SweepAxis::kEta12: return "eta12";
  }
  return "unknown";
}

SweepAxis parse_sweep_axis(std::string_view name) {
  if (name == "n") return SweepAxis::kN;
  if (name == "eta") return SweepAxis::kEta;
  if (name == "eta12") return SweepAxis::kEta12;
  throw Error(ErrorKind::kInvalidConfig, "unknown sweep axis '" + std::string(name) + "'");
}

ExperimentConfig with_axis_value(const ExperimentConfig& base, SweepAxis axis, double value) {
  ExperimentConfig config = base;
  switch (axis) {
    case SweepAxis::kN:
      config.r.reset();
      config.target_n = value;
      break;
    case SweepAxis::kEta:
      config.eta = value;
      break;
    case SweepAxis::kEta12:
      config.eta1 = value;
      config.eta2 = value;
      break;
  }
  return config;
}

std::vector<SweepRow> sweep(const ExperimentConfig& base, SweepAxis axis, const std::vector<double>& values,
                            int threads) {
  if (values.empty()) throw Error(ErrorKind::kInvalidArgument, "sweep needs at least one value");
  std::vector<SweepRow> rows(values.size());
  SqueezeColumnCache cache;
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < values.size(); i = next++) {
      SweepRow& row = rows[i];
      row.value = values[i];
      row.config = with_axis_value(base, axis, values[i]);
      const auto start = std::chrono::steady_clock::now();
      try {
        row.result = run(row.config, &cache);
      } catch (const Error& e) {
        row.error_kind = e.kind();
        row.error = e.what();
      } catch (const std::exception& e) {
        row.error = e.what();
      }
      row.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
  };

  int count = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  count = std::clamp(count, 1, static_cast<int>(values.size()));
  if (count == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < count; ++t) pool.emplace_back(worker);
  }
  return rows;
}

}  // namespace micromacro
