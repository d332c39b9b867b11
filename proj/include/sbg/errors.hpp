#pragma once

#include <stdexcept>
#include <string>

namespace sbg {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller-supplied argument is outside the operation's domain.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Vector/matrix sizes do not agree.
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// A measurement row needs more simultaneous beams than there are RF chains.
class C1Violation : public Error {
 public:
  using Error::Error;
};

/// No balanced partition into M sets can satisfy the RF-chain limit.
class C1Infeasible : public Error {
 public:
  using Error::Error;
};

/// The NM-graph probability is only defined for M >= K.
class MLessThanK : public Error {
 public:
  using Error::Error;
};

/// Experiment configuration failed validation (CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace sbg
