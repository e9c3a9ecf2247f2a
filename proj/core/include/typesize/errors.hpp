#pragma once

#include <stdexcept>
#include <string>

namespace typesize {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A family or lattice specification violates an invariant (rank, normalization, ...).
class SpecError : public Error {
 public:
  using Error::Error;
};

/// A specification document is structurally malformed (missing field, wrong row length).
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// An argument lies outside an operation's domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A configured enumeration budget would be exceeded.
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// A container or codeword cannot be decoded.
class CorruptInputError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace typesize
