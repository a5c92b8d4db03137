#pragma once

#include <stdexcept>
#include <string>

namespace gsp2p {

// Error categories; mirrored one-to-one by the C API status codes.
enum class ErrorCode {
  invalid_argument,
  parse,
  numeric,
  infeasible,
  io,
  internal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& msg)
      : std::runtime_error(msg), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace gsp2p
