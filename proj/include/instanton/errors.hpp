#pragma once

#include <stdexcept>
#include <string>

namespace instanton {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Point outside a chart's open domain or inside one of its excluded sets.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Requested jet order exceeds what the engine supports.
class OrderError : public Error {
 public:
  using Error::Error;
};

class SingularMetricError : public Error {
 public:
  using Error::Error;
};

/// Sample point too close to a Gibbons-Hawking centre or Dirac string.
class SingularityError : public DomainError {
 public:
  using DomainError::DomainError;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class MismatchError : public Error {
 public:
  using Error::Error;
};

class DegenerateFormError : public Error {
 public:
  using Error::Error;
};

class NotTypeDError : public Error {
 public:
  using Error::Error;
};

class NullWeylError : public Error {
 public:
  using Error::Error;
};

class ChiZeroError : public Error {
 public:
  using Error::Error;
};

class CalibrationError : public Error {
 public:
  using Error::Error;
};

class DegenerateRestrictionError : public Error {
 public:
  using Error::Error;
};

class ContourError : public Error {
 public:
  using Error::Error;
};

}  // namespace instanton
