#pragma once

#include <stdexcept>
#include <string>

namespace pals {

/// Base class for recoverable domain errors. Contract violations (bad
/// arguments) are reported as std::invalid_argument instead.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyPointSet : public Error {
 public:
  EmptyPointSet() : Error("empty point set") {}
};

class NoSelectablePoint : public Error {
 public:
  NoSelectablePoint() : Error("no selectable point") {}
};

class InsufficientData : public Error {
 public:
  InsufficientData() : Error("insufficient data") {}
};

class IllConditioned : public Error {
 public:
  explicit IllConditioned(const std::string& what = "ill-conditioned covariance") : Error(what) {}
};

class DegenerateObjective : public Error {
 public:
  DegenerateObjective() : Error("degenerate objective") {}
};

class ReferencePointViolated : public Error {
 public:
  ReferencePointViolated() : Error("reference point violated") {}
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace pals
