#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace dburr {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A requested moment is infinite for the given parameters.
class MomentDoesNotExist : public DomainError {
 public:
  using DomainError::DomainError;
};

/// The data cannot identify the requested parameters.
class DegenerateDataError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// An iterative procedure hit its iteration cap.  `best` holds the best
/// point found so far (may be empty when there is no meaningful point).
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> best = {})
      : Error(what), best_(std::move(best)) {}

  const std::vector<double>& best() const noexcept { return best_; }

 private:
  std::vector<double> best_;
};

/// Two independent evaluation routes disagree.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

/// Reading or writing a file failed.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace dburr
