#pragma once

#include <stdexcept>
#include <string>

namespace loqc {

/// Base class for all numerical failures raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A nonzero amplitude would fall outside the truncated Fock basis.
class TruncationError : public Error {
 public:
  using Error::Error;
};

/// The requested basis would exceed the configured dimension cap.
class DimensionOverflowError : public Error {
 public:
  using Error::Error;
};

/// Two operands live on different Fock bases.
class BasisMismatchError : public Error {
 public:
  using Error::Error;
};

/// Post-selection left (numerically) nothing to normalize: the accepted
/// detection pattern is impossible for this input.
class NearZeroTraceError : public Error {
 public:
  NearZeroTraceError(const std::string& what, double trace) : Error(what), trace_(trace) {}
  double trace() const noexcept { return trace_; }

 private:
  double trace_;
};

}  // namespace loqc
