#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "micromacro/pipeline.hpp"

namespace micromacro {

inline constexpr std::string_view kResultSchema = "micromacro-results v1";

/// One line of a results table. Column order is fixed; see result_columns().
struct ResultRow {
  double r = 0.0;
  double n0 = 0.0;
  double n1 = 0.0;
  double n = 0.0;
  double eta1 = 1.0;
  double eta = 1.0;
  double eta2 = 1.0;
  double concurrence = 0.0;
  double success_prob = 0.0;
  std::string engine;
  std::optional<double> disagreement;
  std::optional<double> wall_time;
};

/// r,n0,n1,n,eta1,eta,eta2,concurrence,success_prob,engine,disagreement,wall_time
const std::vector<std::string>& result_columns();

ResultRow make_result_row(const ExperimentConfig& config, const ExperimentResult& result,
                          std::optional<double> wall_time);

/// 12 significant digits; "nan", "inf", "-inf" for non-finite values.
std::string format_float(double value);

/// Writes "# schema: ..." and any extra "# key: value" lines, the header, then
/// the rows. Optional fields are left empty.
void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows,
                       const std::vector<std::pair<std::string, std::string>>& metadata = {});
void write_result_row(std::ostream& out, const ResultRow& row);

/// Generic CSV table with the schema header line.
void write_table_csv(std::ostream& out, std::string_view schema, const std::vector<std::string>& columns,
                     const std::vector<std::vector<double>>& rows,
                     const std::vector<std::pair<std::string, std::string>>& metadata = {});

/// Plain-text "key = value" configuration. '#' starts a comment; keys are
/// case-sensitive; later assignments override earlier ones.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in, std::string_view source = "<config>");
  static KeyValueConfig load(const std::filesystem::path& path);

  bool has(std::string_view key) const { return values_.count(std::string(key)) != 0; }
  std::optional<std::string> get(std::string_view key) const;
  std::optional<double> get_double(std::string_view key) const;
  std::optional<bool> get_bool(std::string_view key) const;
  /// Comma- or whitespace-separated list of numbers.
  std::optional<std::vector<double>> get_list(std::string_view key) const;
  const std::map<std::string, std::string>& values() const { return values_; }
  void set(std::string key, std::string value) { values_[std::move(key)] = std::move(value); }

 private:
  std::map<std::string, std::string> values_;
  std::string source_;
};

/// Applies the experiment keys r, n, eta1, eta, eta2, engine, loss_on_a,
/// tail_tol and seed on top of base. Setting r clears n and vice versa.
ExperimentConfig apply_config(const KeyValueConfig& kv, ExperimentConfig base);

/// n log-spaced values in [lo, hi] (inclusive), rounded to 12 significant digits.
std::vector<double> log_space(double lo, double hi, int count);
/// lo, lo + step, ... up to hi (inclusive within step / 1000).
std::vector<double> arithmetic_range(double lo, double hi, double step);

/// Writes content to path via a temporary file in the same directory and a
/// rename, creating parent directories. Throws kIo.
void atomic_write(const std::filesystem::path& path, std::string_view content);

/// $MICROMACRO_OUTPUT_DIR if set and non-empty, otherwise the current directory.
std::filesystem::path default_output_dir();

}  // namespace micromacro
