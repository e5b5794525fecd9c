#include "rotframe/error.hpp"

namespace rotframe {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::CoincidentParticles: return "CoincidentParticles";
    case ErrorKind::GaugeSingular: return "GaugeSingular";
    case ErrorKind::ChartNotTranslationInvariant: return "ChartNotTranslationInvariant";
    case ErrorKind::InvalidChart: return "InvalidChart";
    case ErrorKind::StepTooLarge: return "StepTooLarge";
    case ErrorKind::DegenerateInertia: return "DegenerateInertia";
    case ErrorKind::OffSurface: return "OffSurface";
    case ErrorKind::DegenerateJacobian: return "DegenerateJacobian";
    case ErrorKind::StepFailure: return "StepFailure";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NoEliminableCoordinate: return "NoEliminableCoordinate";
    case ErrorKind::QuadratureNotConverged: return "QuadratureNotConverged";
    case ErrorKind::GridTooCoarse: return "GridTooCoarse";
    case ErrorKind::FitResidualTooLarge: return "FitResidualTooLarge";
    case ErrorKind::DegenerateDirection: return "DegenerateDirection";
    case ErrorKind::CollinearDegenerate: return "CollinearDegenerate";
    case ErrorKind::NonIntegerEigenvalue: return "NonIntegerEigenvalue";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

}  // namespace rotframe
