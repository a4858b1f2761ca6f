#pragma once

#include <stdexcept>
#include <string>

namespace limid {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke an operation's precondition (wrong variable kind,
/// mismatched strategy, invalid decomposition, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A configured cap on enumeration or set sizes was exceeded.
class ResourceLimit : public Error {
 public:
  using Error::Error;
};

/// Malformed input document.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace limid
