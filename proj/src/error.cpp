#include "sinkflow/error.hpp"

namespace sinkflow {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ZeroMass: return "ZeroMass";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::Underflow: return "Underflow";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::MaxIterations: return "MaxIterations";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::EigenFailure: return "EigenFailure";
    case ErrorCode::InsufficientTrace: return "InsufficientTrace";
    case ErrorCode::NotTangent: return "NotTangent";
    case ErrorCode::BadArguments: return "BadArguments";
    case ErrorCode::UnknownFamily: return "UnknownFamily";
    case ErrorCode::SizeLimit: return "SizeLimit";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace sinkflow
