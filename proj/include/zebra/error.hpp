#pragma once

#include <stdexcept>
#include <string>

namespace zebra {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A value or parameter violates its domain (bad probability, k < 2, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// An iterative solver ran out of iterations. Carries the last iterate.
class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& what, double last_value)
      : Error(what), last_value_(last_value) {}

  double last_value() const noexcept { return last_value_; }

 private:
  double last_value_;
};

// Closed forms exist only for a few orders.
class UnsupportedOrder : public Error {
 public:
  using Error::Error;
};

// Instance exceeds an enumeration or materialization bound.
class TooLarge : public Error {
 public:
  using Error::Error;
};

// Integer result not representable in 64 bits.
class Overflow : public TooLarge {
 public:
  using TooLarge::TooLarge;
};

class InvalidHatEdge : public Error {
 public:
  using Error::Error;
};

class OddDepth : public Error {
 public:
  using Error::Error;
};

// Bisection indicator does not change sign over its bracket.
class NoBracket : public Error {
 public:
  using Error::Error;
};

// Malformed text input (SigmaConfig lines, config files).
class ParseError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

}  // namespace zebra
