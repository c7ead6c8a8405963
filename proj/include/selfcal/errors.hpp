#pragma once

#include <stdexcept>
#include <string>

namespace selfcal {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: bad JSON lines, non-monotone timestamps, bad config keys.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration or scenario values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A numerical routine could not produce a result (non-PD covariance, log at
/// the branch cut, singular normal equations).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace selfcal
