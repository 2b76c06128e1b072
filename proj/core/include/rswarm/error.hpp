#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rswarm {

enum class ErrorCode {
  InvalidArgument,
  SingularMatrix,
  Infeasible,
  MaxIterations,
  PackingFailed,
  DivergentLoop,
  GridTooCoarse,
  TooManyUsers,
  ZeroCombiner,
  ConfigError,
  IoError,
};

std::string_view error_code_name(ErrorCode code);

/// Every failure raised by the library. The code is stable and is what the
/// CLI reports in its machine-readable error output.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void raise(ErrorCode code, const std::string& what);

inline void require(bool cond, const std::string& what) {
  if (!cond) raise(ErrorCode::InvalidArgument, what);
}

}  // namespace rswarm
