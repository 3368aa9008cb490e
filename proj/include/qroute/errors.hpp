#pragma once

#include <stdexcept>
#include <string>

namespace qroute {

/// Base for every error raised by the library. The CLI maps any of these to a
/// nonzero exit status with the message.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Width beyond the simulable maximum, or tomography/calibration size out of range.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Invalid circuit construction (arity, index bounds, post-select ordering).
class BuildError : public Error {
 public:
  BuildError(std::size_t position, const std::string& what)
      : Error("op " + std::to_string(position) + ": " + what), position_(position) {}
  explicit BuildError(const std::string& what) : Error(what), position_(npos) {}

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

/// An operation was used outside its contract, e.g. a Measure in unitary mode.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Post-selection on an outcome whose probability is below the branch floor.
class ImpossibleBranchError : public Error {
 public:
  ImpossibleBranchError(const std::string& what, double probability)
      : Error(what), probability_(probability) {}
  double probability() const { return probability_; }

 private:
  double probability_;
};

class DegenerateParameterError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : Error("config field '" + field + "': " + what), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

class ConditioningError : public Error {
 public:
  using Error::Error;
};

class IncompleteDataError : public Error {
 public:
  using Error::Error;
};

class UnsupportedGateError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace qroute
