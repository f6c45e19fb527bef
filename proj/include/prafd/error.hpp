#pragma once

#include <stdexcept>
#include <string>

namespace prafd {

// Violated precondition on an argument (bad angle, empty path list, zero column).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Scenario or experiment configuration that cannot be honoured.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Something that the maths says cannot happen did happen.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace prafd
