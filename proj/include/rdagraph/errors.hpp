#pragma once

#include <stdexcept>
#include <string>

namespace rdag {

/// Raised when an iteration fails to converge or a state becomes non-finite.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A path aborted because its state stopped being finite.
class NonFiniteState : public NumericalError {
 public:
  NonFiniteState(const std::string& what, long step)
      : NumericalError(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  long step() const noexcept { return step_; }

 private:
  long step_;
};

/// Malformed or inconsistent experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rdag
