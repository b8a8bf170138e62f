#pragma once

#include <stdexcept>
#include <string>

namespace boxmon {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vector or matrix dimensions disagree with what an operation expects.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A class identifier that the network or monitor does not know about.
class UnknownClassError : public Error {
 public:
  using Error::Error;
};

/// Malformed, truncated or inconsistent file contents.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Invalid argument values (empty sets, out-of-range parameters, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

}  // namespace boxmon
