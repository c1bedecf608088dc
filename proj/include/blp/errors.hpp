#pragma once

#include <stdexcept>
#include <string>

namespace blp {

// Dimension mismatch between operands.
struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Non-finite values (NaN/Inf) where finite values are required.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An operation was called outside its preconditions (empty dataset, n < 2, ...).
struct PreconditionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Stateful object used out of order (e.g. applying decisions twice for one step).
struct StateError : std::logic_error {
  using std::logic_error::logic_error;
};

// Malformed or unreadable input data.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid experiment configuration.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace blp
