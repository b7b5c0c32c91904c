#include "micromacro/error.hpp"

#include <cstdio>

namespace micromacro {

std::string format_number(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.6g", value);
  return buffer;
}

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kTruncationInsufficient: return "truncation_insufficient";
    case ErrorKind::kInvalidEta: return "invalid_eta";
    case ErrorKind::kTailToleranceUnreachable: return "tail_tolerance_unreachable";
    case ErrorKind::kInvalidArgument: return "invalid_argument";
    case ErrorKind::kUnsupportedDegree: return "unsupported_degree";
    case ErrorKind::kZeroTrace: return "zero_trace";
    case ErrorKind::kNonPositive: return "non_positive";
    case ErrorKind::kNotAnXState: return "not_an_x_state";
    case ErrorKind::kTargetBelowMinimum: return "target_below_minimum";
    case ErrorKind::kIllConditioned: return "ill_conditioned";
    case ErrorKind::kInvalidConfig: return "invalid_config";
    case ErrorKind::kIo: return "io_error";
  }
  return "unknown";
}

}  // namespace micromacro
