#pragma once

#include <stdexcept>
#include <string>

namespace treemoo {

/// Thrown for bad input data, unsatisfiable problems and runtime failures.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when a caller breaks a documented precondition.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ContractViolation(message);
}

}  // namespace treemoo
