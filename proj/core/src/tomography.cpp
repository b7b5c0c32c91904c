#include "micromacro/tomography.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <memory>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "micromacro/error.hpp"
#include "micromacro/pattern_functions.hpp"

namespace micromacro {

namespace {

constexpr double kPi = std::numbers::pi;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Uniform in [0, 1) from the top 53 bits; independent of the standard
// library's distribution implementations.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

template <typename Fn>
void parallel_blocks(std::size_t n_blocks, int threads, Fn&& fn) {
  int count = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  count = std::clamp<int>(count, 1, static_cast<int>(std::max<std::size_t>(n_blocks, 1)));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t b = next++; b < n_blocks; b = next++) fn(b);
  };
  if (count == 1) {
    worker();
    return;
  }
  std::vector<std::jthread> pool;
  for (int t = 0; t < count; ++t) pool.emplace_back(worker);
}

std::pair<double, double> phase_pair(PhasePolicy policy, std::size_t index, std::mt19937_64& rng) {
  if (policy == PhasePolicy::kFixedGrid) {
    const std::size_t pair = index % (kGridPhases * kGridPhases);
    return {kPi * static_cast<double>(pair / kGridPhases) / kGridPhases,
            kPi * static_cast<double>(pair % kGridPhases) / kGridPhases};
  }
  const double a = kPi * uniform01(rng);
  const double b = kPi * uniform01(rng);
  return {a, b};
}

}  // namespace

std::string_view to_string(PhasePolicy policy) {
  return policy == PhasePolicy::kFixedGrid ? "fixed_grid" : "uniform_random";
}

PhasePolicy parse_phase_policy(std::string_view name) {
  if (name == "uniform_random" || name == "uniform") return PhasePolicy::kUniformRandom;
  if (name == "fixed_grid" || name == "grid") return PhasePolicy::kFixedGrid;
  throw Error(ErrorKind::kInvalidConfig, "unknown phase policy '" + std::string(name) + "'");
}

void hermite_functions(double x, int n_max, std::vector<double>& out) {
  out.assign(n_max + 1, 0.0);
  out[0] = std::pow(kPi, -0.25) * std::exp(-0.5 * x * x);
  if (n_max >= 1) out[1] = std::numbers::sqrt2 * x * out[0];
  for (int n = 1; n < n_max; ++n) {
    out[n + 1] = std::sqrt(2.0 / (n + 1)) * x * out[n] - std::sqrt(static_cast<double>(n) / (n + 1)) * out[n - 1];
  }
}

JointDensity joint_pdf(const std::vector<EntangledBranch>& branches, double theta_a, double theta_b) {
  // <x_theta| = <x| exp(-i theta n): rotate each amplitude by exp(-i n theta).
  struct Rotated {
    double weight;
    std::vector<Complex> u;
    std::vector<Complex> v;
  };
  auto rotated = std::make_shared<std::vector<Rotated>>();
  int top = 0;
  for (const EntangledBranch& b : branches) {
    Rotated r{b.weight, b.u.amps, b.v.amps};
    for (std::size_t n = 0; n < r.u.size(); ++n) r.u[n] *= std::polar(1.0, -theta_b * static_cast<double>(n));
    for (std::size_t n = 0; n < r.v.size(); ++n) r.v[n] *= std::polar(1.0, -theta_b * static_cast<double>(n));
    top = std::max({top, b.u.n_max(), b.v.n_max()});
    rotated->push_back(std::move(r));
  }
  const Complex phase_a = std::polar(1.0, -theta_a);
  return [rotated, top, phase_a](double xa, double xb) {
    std::vector<double> ha;
    std::vector<double> hb;
    hermite_functions(xa, 1, ha);
    hermite_functions(xb, std::max(top, 1), hb);
    double total = 0.0;
    for (const Rotated& r : *rotated) {
      Complex u{};
      Complex v{};
      for (std::size_t n = 0; n < r.u.size(); ++n) u += hb[n] * r.u[n];
      for (std::size_t n = 0; n < r.v.size(); ++n) v += hb[n] * r.v[n];
      total += r.weight * std::norm(phase_a * ha[1] * u + ha[0] * v);
    }
    return total;
  };
}

JointDensity joint_pdf(const GaussianPolyWigner& w, double theta_a, double theta_b) {
  return [density = quadrature_density(w, theta_a, theta_b)](double xa, double xb) {
    return density.evaluate(xa, xb);
  };
}

double inverse_cdf(const GaussianPoly1D& density, double u) {
  const double total = density.integral();
  if (!(total > 0.0)) throw Error(ErrorKind::kZeroTrace, "cannot sample a density with zero integral");
  const double target = u * total;
  const double scale = 1.0 / std::sqrt(density.width);

  double lo = -6.0 * scale;
  double hi = 6.0 * scale;
  while (density.cumulative(lo) > target) lo *= 2.0;
  while (density.cumulative(hi) < target) hi *= 2.0;

  double x = std::clamp(0.0, lo, hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double f = density.cumulative(x) - target;
    if (f < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    const double slope = density.evaluate(x);
    double next = slope > 0.0 ? x - f / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) < 1e-13 * (1.0 + std::abs(x)) || hi - lo < 1e-13 * (1.0 + std::abs(x))) return next;
    x = next;
  }
  return x;
}

TomographyRecord sample(const GaussianPolyWigner& w, const SamplingOptions& options) {
  if (options.n_samples < 1) throw Error(ErrorKind::kInvalidArgument, "need at least one sample");
  TomographyRecord record;
  record.seed = options.seed;
  record.policy = options.policy;
  record.samples.resize(options.n_samples);

  // The grid policy only ever visits kGridPhases^2 phase pairs.
  std::vector<QuadratureDensity> grid;
  if (options.policy == PhasePolicy::kFixedGrid) {
    for (int a = 0; a < kGridPhases; ++a)
      for (int b = 0; b < kGridPhases; ++b)
        grid.push_back(quadrature_density(w, kPi * a / kGridPhases, kPi * b / kGridPhases));
  }

  const std::size_t n_blocks = (options.n_samples + kSampleBlock - 1) / kSampleBlock;
  parallel_blocks(n_blocks, options.threads, [&](std::size_t block) {
    std::mt19937_64 rng(splitmix64(options.seed ^ splitmix64(block)));
    const std::size_t begin = block * kSampleBlock;
    const std::size_t end = std::min(begin + kSampleBlock, options.n_samples);
    for (std::size_t i = begin; i < end; ++i) {
      QuadratureSample& s = record.samples[i];
      std::tie(s.theta_a, s.theta_b) = phase_pair(options.policy, i, rng);
      const QuadratureDensity density = options.policy == PhasePolicy::kFixedGrid
                                            ? grid[i % grid.size()]
                                            : quadrature_density(w, s.theta_a, s.theta_b);
      s.x_a = inverse_cdf(density.marginal_a(), uniform01(rng));
      s.x_b = inverse_cdf(density.conditional_b(s.x_a), uniform01(rng));
    }
  });
  return record;
}

double phase_moment_residual(const std::vector<QuadratureSample>& samples, int harmonics) {
  if (samples.empty() || harmonics < 1) return 0.0;
  const int h = harmonics;
  // sums[(j + h) * (2h + 1) + (k + h)] accumulates exp(2i (j theta_A + k theta_B)).
  const int width = 2 * h + 1;
  std::vector<Complex> sums(width * width);
  std::vector<Complex> pa(width);
  std::vector<Complex> pb(width);
  for (const QuadratureSample& s : samples) {
    const Complex za = std::polar(1.0, 2.0 * s.theta_a);
    const Complex zb = std::polar(1.0, 2.0 * s.theta_b);
    pa[h] = pb[h] = 1.0;
    for (int j = 1; j <= h; ++j) {
      pa[h + j] = pa[h + j - 1] * za;
      pa[h - j] = std::conj(pa[h + j]);
      pb[h + j] = pb[h + j - 1] * zb;
      pb[h - j] = std::conj(pb[h + j]);
    }
    for (int j = 0; j < width; ++j)
      for (int k = 0; k < width; ++k) sums[j * width + k] += pa[j] * pb[k];
  }
  double worst = 0.0;
  const double n = static_cast<double>(samples.size());
  for (int j = 0; j < width; ++j)
    for (int k = 0; k < width; ++k) {
      if (j == h && k == h) continue;
      worst = std::max(worst, std::abs(sums[j * width + k]) / n);
    }
  return worst;
}

Eigen::Matrix<double, 16, 1> to_real_parameters(const Eigen::Matrix4cd& m) {
  Eigen::Matrix<double, 16, 1> p;
  for (int i = 0; i < 4; ++i) p(i) = m(i, i).real();
  int k = 4;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      p(k++) = m(i, j).real();
      p(k++) = m(i, j).imag();
    }
  return p;
}

Eigen::Matrix4cd from_real_parameters(const Eigen::Matrix<double, 16, 1>& p) {
  Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
  for (int i = 0; i < 4; ++i) m(i, i) = p(i);
  int k = 4;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      m(i, j) = Complex(p(k), p(k + 1));
      m(j, i) = std::conj(m(i, j));
      k += 2;
    }
  return m;
}

Reconstruction reconstruct(const TomographyRecord& record, const ReconstructionOptions& options) {
  const std::size_t n = record.samples.size();
  if (n < 2) throw Error(ErrorKind::kInvalidArgument, "reconstruction needs at least two samples");

  Reconstruction out;
  out.n_samples = n;
  out.max_phase_moment = phase_moment_residual(record.samples, options.conditioning_harmonics);
  const double threshold = 0.1 + 5.0 / std::sqrt(static_cast<double>(n));
  if (options.check_conditioning && out.max_phase_moment > threshold) {
    throw Error(ErrorKind::kIllConditioned,
                "recorded phases are far from uniform (phase moment " + format_number(out.max_phase_moment) +
                    " > " + format_number(threshold) + "); the pattern-function estimate would be biased");
  }

  const PatternFunctions patterns(options.n_cut);
  const int stride = options.n_cut + 1;
  const int n_pop = stride * stride;
  using Vec16 = Eigen::Matrix<double, 16, 1>;
  using Mat16 = Eigen::Matrix<double, 16, 16>;

  auto estimator = [&](const QuadratureSample& s, std::vector<double>& fa, std::vector<double>& fb,
                       Vec16& y, std::vector<double>& pop) {
    patterns.radial_all(s.x_a, fa);
    patterns.radial_all(s.x_b, fb);
    Eigen::Matrix4cd m;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int ip = 0; ip < 2; ++ip)
          for (int jp = 0; jp < 2; ++jp) {
            const Complex a = fa[i * stride + ip] * std::polar(1.0, (i - ip) * s.theta_a);
            const Complex b = fb[j * stride + jp] * std::polar(1.0, (j - jp) * s.theta_b);
            m(2 * i + j, 2 * ip + jp) = a * b;
          }
    y = to_real_parameters(m);
    pop.resize(n_pop);
    for (int a = 0; a < stride; ++a)
      for (int b = 0; b < stride; ++b) pop[a * stride + b] = fa[a * stride + a] * fb[b * stride + b];
  };

  // Shifted single-pass moments, accumulated per block and combined in block
  // order so the result is independent of the thread count.
  std::vector<double> fa;
  std::vector<double> fb;
  Vec16 shift;
  std::vector<double> pop_shift;
  estimator(record.samples[0], fa, fb, shift, pop_shift);

  struct Partial {
    Vec16 s1 = Vec16::Zero();
    Mat16 s2 = Mat16::Zero();
    std::vector<double> p1;
    std::vector<double> p2;
  };
  const std::size_t n_blocks = (n + kSampleBlock - 1) / kSampleBlock;
  std::vector<Partial> partials(n_blocks);
  parallel_blocks(n_blocks, options.threads, [&](std::size_t block) {
    Partial& part = partials[block];
    part.p1.assign(n_pop, 0.0);
    part.p2.assign(n_pop, 0.0);
    std::vector<double> ta;
    std::vector<double> tb;
    std::vector<double> pop;
    Vec16 y;
    const std::size_t begin = block * kSampleBlock;
    const std::size_t end = std::min(begin + kSampleBlock, n);
    for (std::size_t i = begin; i < end; ++i) {
      estimator(record.samples[i], ta, tb, y, pop);
      const Vec16 dy = y - shift;
      part.s1 += dy;
      part.s2.selfadjointView<Eigen::Lower>().rankUpdate(dy);
      for (int k = 0; k < n_pop; ++k) {
        const double dp = pop[k] - pop_shift[k];
        part.p1[k] += dp;
        part.p2[k] += dp * dp;
      }
    }
  });

  Vec16 s1 = Vec16::Zero();
  Mat16 s2 = Mat16::Zero();
  std::vector<double> p1(n_pop, 0.0);
  std::vector<double> p2(n_pop, 0.0);
  for (const Partial& part : partials) {
    s1 += part.s1;
    s2 += part.s2;
    for (int k = 0; k < n_pop; ++k) {
      p1[k] += part.p1[k];
      p2[k] += part.p2[k];
    }
  }
  s2 = s2.selfadjointView<Eigen::Lower>();

  const double count = static_cast<double>(n);
  const Vec16 mean = shift + s1 / count;
  const Mat16 sample_cov = (s2 - s1 * s1.transpose() / count) / (count - 1.0);
  out.covariance = sample_cov / count;
  out.estimate.matrix = from_real_parameters(mean);

  for (int i = 0; i < 4; ++i) out.se_real(i, i) = std::sqrt(std::max(out.covariance(i, i), 0.0));
  int k = 4;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      out.se_real(i, j) = out.se_real(j, i) = std::sqrt(std::max(out.covariance(k, k), 0.0));
      out.se_imag(i, j) = out.se_imag(j, i) = std::sqrt(std::max(out.covariance(k + 1, k + 1), 0.0));
      k += 2;
    }

  out.populations.resize(n_pop);
  out.population_se.resize(n_pop);
  double total_population = 0.0;
  for (int q = 0; q < n_pop; ++q) {
    out.populations[q] = pop_shift[q] + p1[q] / count;
    const double var = (p2[q] - p1[q] * p1[q] / count) / (count - 1.0);
    out.population_se[q] = std::sqrt(std::max(var, 0.0) / count);
    total_population += out.populations[q];
  }
  out.mass_beyond_cutoff = 1.0 - total_population;

  // Delta method on the X-state formula (off-X noise is ignored there).
  auto concurrence_of = [](const Vec16& p) {
    ProjectedDensityMatrix rho;
    rho.matrix = from_real_parameters(p);
    return concurrence_xstate(rho, OffXPolicy::kIgnore).value;
  };
  out.concurrence = concurrence_of(mean);
  Vec16 gradient;
  for (int q = 0; q < 16; ++q) {
    const double h = 1e-6 * std::max(1.0, std::abs(mean(q)));
    Vec16 up = mean;
    Vec16 down = mean;
    up(q) += h;
    down(q) -= h;
    gradient(q) = (concurrence_of(up) - concurrence_of(down)) / (2.0 * h);
  }
  out.concurrence_se = std::sqrt(std::max(gradient.dot(out.covariance * gradient), 0.0));
  return out;
}

void write_record_csv(std::ostream& out, const TomographyRecord& record) {
  out << "# schema: " << kRecordSchema << '\n';
  out << "# seed: " << record.seed << '\n';
  out << "# policy: " << to_string(record.policy) << '\n';
  for (const auto& [key, value] : record.config) out << "# config: " << key << '=' << value << '\n';
  out << "theta_A,theta_B,x_A,x_B\n";
  char line[160];
  for (const QuadratureSample& s : record.samples) {
    std::snprintf(line, sizeof line, "%.12f,%.12f,%.12f,%.12f\n", s.theta_a, s.theta_b, s.x_a, s.x_b);
    out << line;
  }
}

TomographyRecord read_record_csv(std::istream& in) {
  TomographyRecord record;
  std::string line;
  bool header = false;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) {
    throw Error(ErrorKind::kIo, "record line " + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto colon = line.find(':');
      if (colon == std::string::npos) continue;
      std::string key = line.substr(1, colon - 1);
      std::string value = line.substr(colon + 1);
      key.erase(0, key.find_first_not_of(' '));
      value.erase(0, value.find_first_not_of(' '));
      if (key == "schema") {
        if (value.rfind("micromacro-tomography-record v", 0) != 0) fail("unsupported schema '" + value + "'");
      } else if (key == "seed") {
        record.seed = std::strtoull(value.c_str(), nullptr, 10);
      } else if (key == "policy") {
        record.policy = parse_phase_policy(value);
      } else if (key == "config") {
        const auto eq = value.find('=');
        if (eq != std::string::npos) record.config.emplace_back(value.substr(0, eq), value.substr(eq + 1));
      }
      continue;
    }
    if (!header) {
      if (line != "theta_A,theta_B,x_A,x_B") fail("expected header theta_A,theta_B,x_A,x_B");
      header = true;
      continue;
    }
    QuadratureSample s;
    double* fields[4] = {&s.theta_a, &s.theta_b, &s.x_a, &s.x_b};
    const char* cursor = line.c_str();
    for (int f = 0; f < 4; ++f) {
      char* end = nullptr;
      *fields[f] = std::strtod(cursor, &end);
      if (end == cursor) fail("malformed number");
      cursor = end;
      if (f < 3) {
        if (*cursor != ',') fail("expected four comma-separated fields");
        ++cursor;
      }
    }
    if (*cursor != '\0') fail("trailing characters");
    if (!(s.theta_a >= 0.0 && s.theta_a < kPi + 1e-9 && s.theta_b >= 0.0 && s.theta_b < kPi + 1e-9)) {
      fail("phase outside [0, pi)");
    }
    record.samples.push_back(s);
  }
  if (!header) throw Error(ErrorKind::kIo, "record has no header line");
  return record;
}

}  // namespace micromacro
