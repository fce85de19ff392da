#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace solderlab {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed expression text; `offset` is the 0-based byte position.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t offset)
      : Error(message + " at offset " + std::to_string(offset)),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Evaluation left the domain of a function (log/sqrt of a negative, 1/0).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Operands live on different charts or have incompatible shapes.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A pointwise linear map that must be invertible is singular.
class SingularError : public Error {
 public:
  using Error::Error;
};

/// A structural precondition (rank case, integrability, ...) does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A puzzle file is malformed (syntax, missing keys, indices out of range).
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace solderlab
