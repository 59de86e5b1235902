#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace bba {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A documented precondition was violated by the caller.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// Shapes or dimensions do not compose.
class DimensionError : public ContractViolation {
 public:
  using ContractViolation::ContractViolation;
};

/// Operation requested on a model kind that cannot provide it
/// (e.g. gradients of a decision tree).
class UnsupportedOperation : public Error {
 public:
  using Error::Error;
};

/// The oracle's query budget ran out. `completed` carries the labels
/// obtained before the exhausting query when raised from a batch call.
class BudgetExhausted : public Error {
 public:
  explicit BudgetExhausted(const std::string& msg, std::vector<int> done = {})
      : Error(msg), completed(std::move(done)) {}
  std::vector<int> completed;
};

/// A remote oracle endpoint could not be reached.
class RemoteUnreachable : public Error {
 public:
  using Error::Error;
};

/// A remote oracle answered with something outside the wire protocol.
class MalformedResponse : public Error {
 public:
  using Error::Error;
};

/// File or stream level failure (missing file, bad magic, truncation...).
class IoError : public Error {
 public:
  using Error::Error;
};

/// Experiment configuration rejected during validation.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace bba
