#include "cact/errors.hpp"

namespace cact {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Defective: return "Defective";
    case ErrorKind::Overflow: return "Overflow";
    case ErrorKind::DimMismatch: return "DimMismatch";
    case ErrorKind::IllConditioned: return "IllConditioned";
    case ErrorKind::ZeroNorm: return "ZeroNorm";
    case ErrorKind::NearOrthogonal: return "NearOrthogonal";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::Precondition: return "Precondition";
    case ErrorKind::Blowup: return "Blowup";
    case ErrorKind::NoImprovement: return "NoImprovement";
    case ErrorKind::Parse: return "ParseError";
    case ErrorKind::Validation: return "ValidationError";
  }
  return "Unknown";
}

bool is_numerical(ErrorKind kind) {
  return kind != ErrorKind::Parse && kind != ErrorKind::Validation;
}

}  // namespace cact
