#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stabilab {

enum class ErrorKind {
  EmptyHorizon,
  NonStationary,
  Uncontrollable,
  DegenerateOpenLoop,
  NoConvergence,
  UnboundedLoss,
  NoRobustStabilizer,
  NoStablePlan,
  IdentificationFailure,
  SchemaError,
  InsufficientData,
  InvalidArgument,
  ConfigError,
  IOError,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::EmptyHorizon: return "EmptyHorizon";
    case ErrorKind::NonStationary: return "NonStationary";
    case ErrorKind::Uncontrollable: return "Uncontrollable";
    case ErrorKind::DegenerateOpenLoop: return "DegenerateOpenLoop";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::UnboundedLoss: return "UnboundedLoss";
    case ErrorKind::NoRobustStabilizer: return "NoRobustStabilizer";
    case ErrorKind::NoStablePlan: return "NoStablePlan";
    case ErrorKind::IdentificationFailure: return "IdentificationFailure";
    case ErrorKind::SchemaError: return "SchemaError";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IOError: return "IOError";
  }
  return "Unknown";
}

/// Every library failure is reported through this exception; `kind()` is the
/// stable name the CLI prints.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace stabilab
