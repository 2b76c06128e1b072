#include "rswarm/error.hpp"

namespace rswarm {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::SingularMatrix: return "SingularMatrix";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::MaxIterations: return "MaxIterations";
    case ErrorCode::PackingFailed: return "PackingFailed";
    case ErrorCode::DivergentLoop: return "DivergentLoop";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::TooManyUsers: return "TooManyUsers";
    case ErrorCode::ZeroCombiner: return "ZeroCombiner";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

void raise(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace rswarm
