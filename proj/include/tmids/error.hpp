#pragma once

#include <stdexcept>
#include <string>

namespace tmids {

// Bad arguments, out-of-range hyperparameters, empty inputs.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data (schemas, labels, files).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A sample/model/table has the wrong shape for the operation.
class DimensionError : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace tmids
