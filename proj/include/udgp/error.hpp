#pragma once

#include <stdexcept>
#include <string>

namespace udgp {

/// Broad failure classes. The CLI maps these onto process exit codes.
enum class ErrorCode {
  InvalidArgument,  // caller broke a precondition
  Data,             // malformed or inconsistent input data
  Budget,           // search budget or iteration cap exhausted
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool cond, const std::string& msg, ErrorCode code = ErrorCode::InvalidArgument) {
  if (!cond) throw Error(code, msg);
}

}  // namespace udgp
