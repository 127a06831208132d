#pragma once

#include <stdexcept>
#include <string>

namespace erestab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input: out-of-range parameter, invalid mass system.
class DomainError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

class SingularityError : public Error {
 public:
  using Error::Error;
};

class ExistenceError : public Error {
 public:
  using Error::Error;
};

// Newton landed on a solution of the wrong kind (e.g. on the primaries' line).
class DegenerateSolutionError : public Error {
 public:
  using Error::Error;
};

}  // namespace erestab
