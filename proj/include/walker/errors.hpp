#pragma once

#include <stdexcept>
#include <string>

namespace walker {

// Invalid inputs: bad parameters, malformed matrices, out-of-bounds genes.
class ValidationError : public std::runtime_error {
public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical blowup during integration; carries the step at which it occurred.
class IntegrationError : public std::runtime_error {
public:
  IntegrationError(const std::string& what, long step)
      : std::runtime_error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  long step() const { return step_; }

private:
  long step_;
};

}  // namespace walker
