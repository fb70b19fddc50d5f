#pragma once

#include <stdexcept>
#include <string>

namespace dlr {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad command-line usage or configuration.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent input data.
class DataError : public Error {
 public:
  using Error::Error;
};

// Non-finite values during training or inference.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace dlr
