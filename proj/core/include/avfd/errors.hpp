#pragma once

#include <stdexcept>
#include <string>

namespace avfd {

// Base class for all toolkit errors. Subclasses map onto CLI exit codes:
// config (2), data (3), numeric (4).
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class ParseError : public DataError {
 public:
  using DataError::DataError;
};

class ValidationError : public DataError {
 public:
  using DataError::DataError;
};

class IoError : public DataError {
 public:
  using DataError::DataError;
};

class DimensionMismatch : public NumericError {
 public:
  using NumericError::NumericError;
};

class EmptySequence : public NumericError {
 public:
  using NumericError::NumericError;
};

class EmptyAudio : public NumericError {
 public:
  using NumericError::NumericError;
};

class EmptyImage : public NumericError {
 public:
  using NumericError::NumericError;
};

class EmptyBatch : public NumericError {
 public:
  using NumericError::NumericError;
};

class EmptyPolarity : public NumericError {
 public:
  using NumericError::NumericError;
};

class EmptyGroup : public NumericError {
 public:
  using NumericError::NumericError;
};

class NonFinite : public NumericError {
 public:
  using NumericError::NumericError;
};

class SingleClass : public NumericError {
 public:
  using NumericError::NumericError;
};

class TooFewSamples : public NumericError {
 public:
  using NumericError::NumericError;
};

class InvalidSpec : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

}  // namespace avfd
