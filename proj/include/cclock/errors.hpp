#pragma once

#include <stdexcept>
#include <string>

namespace cclock {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed user input: delay specs, pmf files, config keys.
class InputError : public Error {
 public:
  InputError(const std::string& msg, std::string key = {})
      : Error(msg), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// Argument outside the real domain of an analytic expression.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// p at or below the security threshold; carries the computed threshold.
class PreconditionError : public Error {
 public:
  PreconditionError(const std::string& msg, double p_critical)
      : Error(msg), p_critical_(p_critical) {}
  double p_critical() const noexcept { return p_critical_; }

 private:
  double p_critical_;
};

/// A root bracket whose endpoints do not straddle a sign change.
class BracketError : public Error {
 public:
  using Error::Error;
};

/// Two independent evaluation routes disagree; indicates a bug or corrupted input.
class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace cclock
