#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ctlopt {

/// Invalid model or payoff parameter (s0 <= 0, d0 >= d1, epsilon out of range, ...).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A control path violates the admissible set of its weight mode.
class AdmissibilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Configuration failed validation. `field()` is the dotted path of the
/// offending entry, e.g. "payoff.bounds.d0".
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// The backward sweep produced a non-finite value.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(std::size_t slice, const std::string& what)
      : std::runtime_error(what + " (time slice " + std::to_string(slice) + ")"),
        slice_(slice) {}

  std::size_t slice() const noexcept { return slice_; }

 private:
  std::size_t slice_;
};

/// A value-function query falls outside the grid hull.
class ExtrapolationError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

}  // namespace ctlopt
