// SPDX-License-Identifier: Apache-2.0
#include "common/error.hpp"

namespace floeberg {

const char *to_string(ErrorKind kind) noexcept {
  switch (kind) {
  case ErrorKind::InvalidInput:
    return "invalid input";
  case ErrorKind::OutOfScope:
    return "out of scope";
  case ErrorKind::Numeric:
    return "numeric error";
  case ErrorKind::Parse:
    return "parse error";
  case ErrorKind::Io:
    return "i/o error";
  case ErrorKind::MissingInput:
    return "missing input";
  case ErrorKind::NoReference:
    return "no sea-surface reference";
  case ErrorKind::Consistency:
    return "consistency error";
  case ErrorKind::ArchitectureMismatch:
    return "architecture mismatch";
  case ErrorKind::Internal:
    return "internal error";
  }
  return "unknown error";
}

} // namespace floeberg
