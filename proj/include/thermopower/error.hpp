#pragma once

#include <stdexcept>
#include <string>

namespace thermopower {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file (bad header, short row, unparsable number, bad JSON).
class ParseError : public Error {
public:
  using Error::Error;
};

/// Input parsed but violates a domain invariant.
class ValidationError : public Error {
public:
  using Error::Error;
};

/// Numerical failure: non-convergence, negative radicand, non-finite values.
class ComputationError : public Error {
public:
  using Error::Error;
};

}  // namespace thermopower
