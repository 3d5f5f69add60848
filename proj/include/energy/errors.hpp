#pragma once

#include <stdexcept>
#include <string>

namespace energy {

// Base of every error raised by the library. Callers that only need to
// distinguish "bad input" from "numeric failure" can use the two
// intermediate classes.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input: shapes, ranges, schema.
class ValidationError : public Error {
public:
  using Error::Error;
};

// Numeric routines that failed to produce a result.
class NumericError : public Error {
public:
  using Error::Error;
};

class ShapeError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

class EmptyInputError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

class ParameterError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

class PreconditionError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

class NoCompleteCasesError : public ValidationError {
public:
  NoCompleteCasesError() : ValidationError("no complete cases") {}
  explicit NoCompleteCasesError(const std::string& which)
      : ValidationError("no complete cases in " + which) {}
};

class UnimputableColumnError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

class ParseError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

class IngestionError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

class SchemaError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

class FactorizationError : public NumericError {
public:
  using NumericError::NumericError;
};

class CalibrationError : public NumericError {
public:
  using NumericError::NumericError;
};

class OracleError : public NumericError {
public:
  using NumericError::NumericError;
};

} // namespace energy
