#include "uwbloc/error.hpp"

namespace uwbloc {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DegenerateLayout: return "DegenerateLayout";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::Singular: return "Singular";
    case ErrorCode::Ambiguous: return "Ambiguous";
    case ErrorCode::EmptyResult: return "EmptyResult";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::NoCandidates: return "NoCandidates";
    case ErrorCode::NotLeader: return "NotLeader";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace uwbloc
