#pragma once

#include <stdexcept>
#include <string>

namespace beatfuse {

// Error categories map onto process exit codes: usage/config = 1,
// data = 2, numeric/training = 3.
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace beatfuse
