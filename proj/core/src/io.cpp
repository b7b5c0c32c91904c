#include "micromacro/io.hpp"

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "micromacro/error.hpp"

namespace micromacro {

namespace {

std::string trim(std::string_view s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) return {};
  const auto end = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(begin, end - begin + 1));
}

double parse_number(const std::string& text, std::string_view key) {
  char* end = nullptr;
  const double value = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size()) {
    throw Error(ErrorKind::kInvalidConfig, "key '" + std::string(key) + "': '" + text + "' is not a number");
  }
  return value;
}

double round_significant(double value) { return std::strtod(format_float(value).c_str(), nullptr); }

}  // namespace

const std::vector<std::string>& result_columns() {
  static const std::vector<std::string> columns{"r",   "n0",          "n1",           "n",
                                                "eta1", "eta",        "eta2",         "concurrence",
                                                "success_prob", "engine", "disagreement", "wall_time"};
  return columns;
}

ResultRow make_result_row(const ExperimentConfig& config, const ExperimentResult& result,
                          std::optional<double> wall_time) {
  ResultRow row;
  row.r = result.r;
  row.n0 = result.n0;
  row.n1 = result.n1;
  row.n = result.n;
  row.eta1 = config.eta1;
  row.eta = config.eta;
  row.eta2 = config.eta2;
  row.concurrence = result.concurrence.value;
  row.success_prob = result.success_prob;
  row.engine = std::string(to_string(result.diagnostics.engine_used));
  row.disagreement = result.diagnostics.disagreement;
  row.wall_time = wall_time;
  return row;
}

std::string format_float(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.12g", value == 0.0 ? 0.0 : value);  // no "-0"
  return buffer;
}

void write_result_row(std::ostream& out, const ResultRow& row) {
  for (double v : {row.r, row.n0, row.n1, row.n, row.eta1, row.eta, row.eta2, row.concurrence, row.success_prob}) {
    out << format_float(v) << ',';
  }
  out << row.engine << ',';
  if (row.disagreement) out << format_float(*row.disagreement);
  out << ',';
  if (row.wall_time) out << format_float(*row.wall_time);
  out << '\n';
}

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows,
                       const std::vector<std::pair<std::string, std::string>>& metadata) {
  out << "# schema: " << kResultSchema << '\n';
  for (const auto& [key, value] : metadata) out << "# " << key << ": " << value << '\n';
  const auto& columns = result_columns();
  for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
  out << '\n';
  for (const ResultRow& row : rows) write_result_row(out, row);
}

void write_table_csv(std::ostream& out, std::string_view schema, const std::vector<std::string>& columns,
                     const std::vector<std::vector<double>>& rows,
                     const std::vector<std::pair<std::string, std::string>>& metadata) {
  out << "# schema: " << schema << '\n';
  for (const auto& [key, value] : metadata) out << "# " << key << ": " << value << '\n';
  for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_float(row[i]);
    out << '\n';
  }
}

KeyValueConfig KeyValueConfig::parse(std::istream& in, std::string_view source) {
  KeyValueConfig config;
  config.source_ = std::string(source);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string content = trim(line);
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::kInvalidConfig,
                  std::string(source) + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(std::string_view(content).substr(0, eq));
    if (key.empty()) {
      throw Error(ErrorKind::kInvalidConfig, std::string(source) + ":" + std::to_string(line_no) + ": empty key");
    }
    config.values_[key] = trim(std::string_view(content).substr(eq + 1));
  }
  return config;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open config file " + path.string());
  return parse(in, path.string());
}

std::optional<std::string> KeyValueConfig::get(std::string_view key) const {
  auto it = values_.find(std::string(key));
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::optional<double> KeyValueConfig::get_double(std::string_view key) const {
  auto text = get(key);
  if (!text) return std::nullopt;
  return parse_number(*text, key);
}

std::optional<bool> KeyValueConfig::get_bool(std::string_view key) const {
  auto text = get(key);
  if (!text) return std::nullopt;
  if (*text == "true" || *text == "1" || *text == "yes" || *text == "on") return true;
  if (*text == "false" || *text == "0" || *text == "no" || *text == "off") return false;
  throw Error(ErrorKind::kInvalidConfig, "key '" + std::string(key) + "': '" + *text + "' is not a boolean");
}

std::optional<std::vector<double>> KeyValueConfig::get_list(std::string_view key) const {
  auto text = get(key);
  if (!text) return std::nullopt;
  std::string normalized = *text;
  for (char& c : normalized)
    if (c == ',') c = ' ';
  std::istringstream in(normalized);
  std::vector<double> out;
  std::string token;
  while (in >> token) out.push_back(parse_number(token, key));
  if (out.empty()) throw Error(ErrorKind::kInvalidConfig, "key '" + std::string(key) + "' has an empty list");
  return out;
}

ExperimentConfig apply_config(const KeyValueConfig& kv, ExperimentConfig base) {
  if (kv.has("r") && kv.has("n")) throw Error(ErrorKind::kInvalidConfig, "config sets both r and n");
  if (auto r = kv.get_double("r")) {
    base.r = *r;
    base.target_n.reset();
  }
  if (auto n = kv.get_double("n")) {
    base.target_n = *n;
    base.r.reset();
  }
  if (auto v = kv.get_double("eta1")) base.eta1 = *v;
  if (auto v = kv.get_double("eta")) base.eta = *v;
  if (auto v = kv.get_double("eta2")) base.eta2 = *v;
  if (auto v = kv.get("engine")) base.engine = parse_engine(*v);
  if (auto v = kv.get_bool("loss_on_a")) base.loss_on_a = *v;
  if (auto v = kv.get_double("tail_tol")) base.tail_tol = *v;
  if (auto v = kv.get("seed")) base.seed = static_cast<std::uint64_t>(parse_number(*v, "seed"));
  return base;
}

std::vector<double> log_space(double lo, double hi, int count) {
  if (!(lo > 0.0 && hi >= lo) || count < 1) {
    throw Error(ErrorKind::kInvalidConfig, "log_space needs 0 < lo <= hi and count >= 1");
  }
  if (count == 1) return {round_significant(lo)};
  std::vector<double> out(count);
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (int i = 0; i < count; ++i) out[i] = round_significant(std::exp(a + (b - a) * i / (count - 1)));
  out.front() = lo;
  out.back() = hi;
  return out;
}

std::vector<double> arithmetic_range(double lo, double hi, double step) {
  if (!(step > 0.0) || hi < lo) throw Error(ErrorKind::kInvalidConfig, "range needs step > 0 and hi >= lo");
  std::vector<double> out;
  for (int i = 0;; ++i) {
    const double v = lo + i * step;
    if (v > hi + step * 1e-3) break;
    out.push_back(round_significant(v));
  }
  return out;
}

void atomic_write(const std::filesystem::path& path, std::string_view content) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw Error(ErrorKind::kIo, "cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::kIo, "cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      fs::remove(tmp, ec);
      throw Error(ErrorKind::kIo, "write to " + tmp.string() + " failed");
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorKind::kIo, "cannot move output into place at " + path.string());
  }
}

std::filesystem::path default_output_dir() {
  if (const char* env = std::getenv("MICROMACRO_OUTPUT_DIR"); env != nullptr && *env != '\0') return env;
  return ".";
}

}  // namespace micromacro
