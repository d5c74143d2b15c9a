#pragma once

#include <stdexcept>
#include <string>

namespace nextrec {

// Base of every error the library raises. The CLI prints what() and exits
// nonzero.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed file content that cannot be skipped (embedding files, matrices,
// manifests, config).
class FormatError : public Error {
 public:
  using Error::Error;
};

class EmptyInputError : public Error {
 public:
  using Error::Error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

// Inputs that are individually valid but leave nothing to work with, e.g. a
// split whose test or train side is empty.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

class InputError : public Error {
 public:
  using Error::Error;
};

class SingularError : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace nextrec
