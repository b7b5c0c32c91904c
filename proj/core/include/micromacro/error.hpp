#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace micromacro {

enum class ErrorKind {
  kTruncationInsufficient,
  kInvalidEta,
  kTailToleranceUnreachable,
  kInvalidArgument,
  kUnsupportedDegree,
  kZeroTrace,
  kNonPositive,
  kNotAnXState,
  kTargetBelowMinimum,
  kIllConditioned,
  kInvalidConfig,
  kIo,
};

/// Shortest round-trippable-ish rendering (%.6g) for error messages.
std::string format_number(double value);

/// Stable machine-readable name, e.g. "truncation_insufficient".
std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries a kind so callers (and the
/// CLI's JSON error output) can dispatch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace micromacro
