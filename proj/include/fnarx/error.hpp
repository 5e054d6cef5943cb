#pragma once

#include <stdexcept>
#include <string>

namespace fnarx {

/// Failure category, surfaced by the CLI in its machine-readable error JSON.
enum class ErrorKind {
  kInvalidArgument,
  kIo,
  kParse,
  kNumerical,
};

/// Single exception type thrown by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument:
      return "invalid_argument";
    case ErrorKind::kIo:
      return "io";
    case ErrorKind::kParse:
      return "parse";
    case ErrorKind::kNumerical:
      return "numerical";
  }
  return "unknown";
}

[[noreturn]] inline void throw_invalid(const std::string& what) {
  throw Error(ErrorKind::kInvalidArgument, what);
}

}  // namespace fnarx
