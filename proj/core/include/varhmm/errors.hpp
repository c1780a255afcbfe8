#pragma once

#include <stdexcept>
#include <string>

namespace varhmm {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A parameter value is outside its valid domain (non-positive shape,
/// non-SPD scale, malformed simplex, ...).
class InvalidParameterError : public Error {
 public:
  using Error::Error;
};

/// Matrix or vector dimensions do not conform.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// An autoregressive operation was given fewer than `order` past frames.
class InsufficientHistoryError : public Error {
 public:
  using Error::Error;
};

/// Not enough data to perform the requested computation.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

/// A numerical computation failed (non-finite likelihood, factorization
/// failure after jitter, ...).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file; messages carry the offending row where known.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Invalid observation fed to a running computation.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Model/library file version, checksum or structure problems.
class SerializationError : public Error {
 public:
  using Error::Error;
};

/// Filesystem-level failure.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace varhmm
