#pragma once

#include <stdexcept>
#include <string>

namespace fgneg {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shape or symmetry violations of input matrices.
class StructuralError : public Error {
 public:
  using Error::Error;
};

// Spectrum of i*gamma outside [-1, 1] beyond tolerance.
class PhysicalityError : public Error {
 public:
  using Error::Error;
};

class UnsupportedError : public Error {
 public:
  using Error::Error;
};

// Dense computations that would exceed the mode cap.
class ResourceError : public Error {
 public:
  using Error::Error;
};

// Singular 1 + i*gamma when building a Gaussian operator.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace fgneg
