#pragma once

#include <stdexcept>
#include <string>

namespace tsg {

/// Error categories; these map one-to-one onto the C API status codes.
enum class ErrorCode {
  InvalidArgument,
  SpecInvalid,
  Parse,
  Io,
  SingularConfiguration,
  Degenerate,
  OracleFailure,
  Unidentifiable,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace tsg
