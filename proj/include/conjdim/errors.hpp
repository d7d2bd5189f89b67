#pragma once

#include <stdexcept>
#include <string>

namespace conjdim {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Bad parameters, malformed spec strings, unknown config keys.
class ConfigError : public Error {
public:
  using Error::Error;
};

// A map that was constructed but fails the expanding full-branch invariants.
class ValidationError : public ConfigError {
public:
  using ConfigError::ConfigError;
};

class ConvergenceError : public Error {
public:
  using Error::Error;
};

// Requested accuracy is below what the floating point evaluation can deliver.
class PrecisionError : public ConvergenceError {
public:
  using ConvergenceError::ConvergenceError;
};

// beta-tilde is flat: the pair behaves as cohomologically dependent.
class DependenceSignal : public Error {
public:
  using Error::Error;
};

class ProbeFailure : public Error {
public:
  using Error::Error;
};

} // namespace conjdim
