#pragma once

#include <stdexcept>
#include <string>

namespace bleedscan {

enum class ErrorKind {
  InvalidArgument,
  Io,
  UnsupportedFormat,
  BitDepth,
  Corrupt,
  Parse,
  Evaluation,
};

// Single exception type for the library; the C API maps `kind` onto its
// status codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace bleedscan
