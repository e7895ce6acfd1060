#pragma once

#include <stdexcept>
#include <string>

namespace ktraffic {

// A parameter lies outside the mathematical domain of the model.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Configuration file or manifest is malformed or inconsistent.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A simulation step produced a state outside [0,1] by more than round-off.
class BoundViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace ktraffic
