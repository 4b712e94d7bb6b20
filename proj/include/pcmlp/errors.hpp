#pragma once

#include <stdexcept>
#include <string>

namespace pcmlp {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// Raised when an exact (tabular) routine receives a continuous or black-box model.
class UnsupportedModel : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  NumericError(const std::string& what, double condition_estimate)
      : Error(what), condition_estimate_(condition_estimate) {}
  double condition_estimate() const { return condition_estimate_; }

 private:
  double condition_estimate_;
};

// Dynamics produced a non-finite state.
class RolloutError : public Error {
 public:
  RolloutError(const std::string& what, int step) : Error(what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Raised by optimistic planning when the confidence set is empty.
class ConfidenceRegionEmpty : public Error {
 public:
  using Error::Error;
};

}  // namespace pcmlp
