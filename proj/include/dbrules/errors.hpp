#pragma once

#include <stdexcept>
#include <string>

namespace dbrules {

// Base of every domain error raised by the library. The CLI maps these to exit
// code 1; anything else escaping is a bug.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

// Memory length of two operands disagrees, or a feature vector has the wrong
// width for a model.
class ArityError : public Error {
 public:
  using Error::Error;
};

class NotDeBruijnError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

// Rule lacks the boundary/complement structure an operation requires.
class StructureError : public Error {
 public:
  using Error::Error;
};

// Enumeration would exceed a practical size guard and no override was given.
class CapacityError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace dbrules
