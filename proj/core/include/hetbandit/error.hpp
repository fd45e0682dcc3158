#ifndef HETBANDIT_ERROR_HPP
#define HETBANDIT_ERROR_HPP

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hetbandit {

enum class ErrorCode {
  InvalidArgument,
  DimensionMismatch,
  InvalidInstance,
  SingularInformation,
  SpanViolation,
  InsufficientBudget,
  RankDeficientLift,
  DegenerateGap,
  UnknownPreset,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library. `detail()` carries the numeric
/// payload some errors have (the smallest Cholesky pivot for
/// SingularInformation, the offending residual for SpanViolation).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<double> detail = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  std::optional<double> detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::optional<double> detail_;
};

// Warnings go to stderr unless a handler is installed. Not thread-safe to
// swap while runs are in flight.
using WarningHandler = void (*)(std::string_view);
void set_warning_handler(WarningHandler handler) noexcept;
void warn(std::string_view message);

}  // namespace hetbandit

#endif  // HETBANDIT_ERROR_HPP
