#pragma once

#include <stdexcept>
#include <string>

namespace bellvol {

// All library errors derive from Error so callers can catch one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SignalingInput : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class Infeasible : public Error {
 public:
  using Error::Error;
};

// Raised by a Gibbs step when the feasible chord along the chosen coordinate
// has collapsed numerically.
class DegenerateInterval : public Error {
 public:
  using Error::Error;
};

class TooManyVertices : public Error {
 public:
  using Error::Error;
};

class UnsupportedLevel : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace bellvol
