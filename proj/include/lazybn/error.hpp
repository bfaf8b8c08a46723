#pragma once

#include <stdexcept>
#include <string>

namespace lazybn {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text (network or evidence files).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Input is well-formed but violates a model invariant (cycle, bad CPT, unknown name).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A variable set argument is not contained in the domain it refers to.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Non-finite table entries or a requested table that is too large to allocate.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// x / 0 with x > 0 during potential division.
class DivisionError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// The evidence has zero probability under the model.
class ImpossibleEvidence : public Error {
 public:
  using Error::Error;
};

/// Graph-structural precondition failed (cycle, missing head factor, ...).
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// A runtime invariant check fired. Always a bug in the library.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace lazybn
