#pragma once

#include <stdexcept>
#include <string>

namespace dpfl {

// Precondition violated by the caller (bad arity, empty input, ...).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A split that leaves one child empty.
class InvalidSplit : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Prediction requested from a forest with no trees.
class EmptyModel : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Ingestion failure (missing column, empty file, every row dropped).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dpfl
