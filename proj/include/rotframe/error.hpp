#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rotframe {

enum class ErrorKind {
  CoincidentParticles,
  GaugeSingular,
  ChartNotTranslationInvariant,
  InvalidChart,
  StepTooLarge,
  DegenerateInertia,
  OffSurface,
  DegenerateJacobian,
  StepFailure,
  DimensionMismatch,
  NoEliminableCoordinate,
  QuadratureNotConverged,
  GridTooCoarse,
  FitResidualTooLarge,
  DegenerateDirection,
  CollinearDegenerate,
  NonIntegerEigenvalue,
  InvalidArgument,
  ConfigInvalid,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Single exception type; callers dispatch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace rotframe
