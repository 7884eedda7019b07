// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace floeberg {

enum class ErrorKind {
  InvalidInput,
  OutOfScope,
  Numeric,
  Parse,
  Io,
  MissingInput,
  NoReference,
  Consistency,
  ArchitectureMismatch,
  Internal,
};

const char *to_string(ErrorKind kind) noexcept;

/// Every failure raised by the core carries a kind so the C boundary can map
/// it onto a stable error code.
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string &what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string &what) {
  throw Error(kind, what);
}

inline void require(bool condition, ErrorKind kind, const std::string &what) {
  if (!condition)
    throw Error(kind, what);
}

} // namespace floeberg
