#pragma once

#include <stdexcept>
#include <string>

namespace dbkf {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Innovation covariance or normal-equation matrix could not be factorized,
// or a propagated quantity became non-finite.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// The leg Jacobian is too ill-conditioned to invert.
class SingularConfiguration : public Error {
 public:
  using Error::Error;
};

class SequencingError : public Error {
 public:
  using Error::Error;
};

class ScenarioError : public Error {
 public:
  using Error::Error;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class AlignmentError : public Error {
 public:
  using Error::Error;
};

// A file could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

// A metric is undefined for the given input (for example a zero-length path).
class UndefinedMetric : public Error {
 public:
  using Error::Error;
};

}  // namespace dbkf
