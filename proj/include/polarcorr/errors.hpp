#pragma once

#include <stdexcept>
#include <string>

namespace polarcorr {

// Argument outside the mathematical domain of an operation (probability not in
// [0,1], rate not in (0,1], ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class LengthMismatchError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Request exceeds a memory or enumeration budget.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A numerical invariant was broken beyond tolerance. Indicates a bug, not bad input.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace polarcorr
