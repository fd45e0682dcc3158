#include "hetbandit/error.hpp"

#include <atomic>
#include <iostream>

namespace hetbandit {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidInstance: return "InvalidInstance";
    case ErrorCode::SingularInformation: return "SingularInformation";
    case ErrorCode::SpanViolation: return "SpanViolation";
    case ErrorCode::InsufficientBudget: return "InsufficientBudget";
    case ErrorCode::RankDeficientLift: return "RankDeficientLift";
    case ErrorCode::DegenerateGap: return "DegenerateGap";
    case ErrorCode::UnknownPreset: return "UnknownPreset";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message,
             std::optional<double> detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      detail_(detail) {}

namespace {

void default_warning(std::string_view message) {
  std::cerr << "hetbandit warning: " << message << '\n';
}

std::atomic<WarningHandler> g_warning_handler{&default_warning};

}  // namespace

void set_warning_handler(WarningHandler handler) noexcept {
  g_warning_handler.store(handler ? handler : &default_warning);
}

void warn(std::string_view message) { g_warning_handler.load()(message); }

}  // namespace hetbandit
