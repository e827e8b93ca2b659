#pragma once

#include <stdexcept>
#include <string>

namespace mlpdyn {

// Bad arguments or violated preconditions. The CLI maps this to exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// File could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File opened but its content is malformed or inconsistent.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An iterative solver hit its iteration cap.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mlpdyn
