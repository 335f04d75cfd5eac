#ifndef ELDPP_ERROR_HPP
#define ELDPP_ERROR_HPP

#include <stdexcept>
#include <string>

namespace eldpp {

enum class ErrorKind {
  // configuration / argument problems
  InvalidArgument,
  InvalidSize,
  SizeOutOfRange,
  IndexOutOfRange,
  TargetOutOfRange,
  GroundSetTooLarge,
  OverflowGuard,
  // model validation
  AsymmetricL,
  RankDeficientV,
  NotConditionallyPSD,
  KernelOutOfRange,
  DegenerateMarginal,
  EvenBeta,
  DisconnectedGraph,
  // numerical failures
  NonOrthonormalInput,
  NumericalBreakdown,
  SingularState,
  SingularSystem,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::InvalidSize: return "InvalidSize";
    case ErrorKind::SizeOutOfRange: return "SizeOutOfRange";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::TargetOutOfRange: return "TargetOutOfRange";
    case ErrorKind::GroundSetTooLarge: return "GroundSetTooLarge";
    case ErrorKind::OverflowGuard: return "OverflowGuard";
    case ErrorKind::AsymmetricL: return "AsymmetricL";
    case ErrorKind::RankDeficientV: return "RankDeficientV";
    case ErrorKind::NotConditionallyPSD: return "NotConditionallyPSD";
    case ErrorKind::KernelOutOfRange: return "KernelOutOfRange";
    case ErrorKind::DegenerateMarginal: return "DegenerateMarginal";
    case ErrorKind::EvenBeta: return "EvenBeta";
    case ErrorKind::DisconnectedGraph: return "DisconnectedGraph";
    case ErrorKind::NonOrthonormalInput: return "NonOrthonormalInput";
    case ErrorKind::NumericalBreakdown: return "NumericalBreakdown";
    case ErrorKind::SingularState: return "SingularState";
    case ErrorKind::SingularSystem: return "SingularSystem";
  }
  return "Unknown";
}

/// Coarse classification used by the command-line tool for exit codes.
enum class ErrorCategory { Config, Model, Numerical };

inline ErrorCategory category(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::AsymmetricL:
    case ErrorKind::RankDeficientV:
    case ErrorKind::NotConditionallyPSD:
    case ErrorKind::KernelOutOfRange:
    case ErrorKind::DegenerateMarginal:
    case ErrorKind::EvenBeta:
    case ErrorKind::DisconnectedGraph:
      return ErrorCategory::Model;
    case ErrorKind::NonOrthonormalInput:
    case ErrorKind::NumericalBreakdown:
    case ErrorKind::SingularState:
    case ErrorKind::SingularSystem:
      return ErrorCategory::Numerical;
    default:
      return ErrorCategory::Config;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace eldpp

#endif  // ELDPP_ERROR_HPP
