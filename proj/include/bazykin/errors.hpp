#pragma once

#include <stdexcept>
#include <string>

namespace bazykin {

// Base of everything the library throws on a contract violation.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An argument lies outside the region where the operation is defined
// (non-positive parameter, pole of a nullcline, C <= M where C > M is needed).
class DomainError : public Error {
 public:
  using Error::Error;
};

// The input sits exactly on a boundary where the generic classification does
// not apply (region boundaries of the origin, vanishing denominators).
class NonGenericError : public Error {
 public:
  using Error::Error;
};

// The operation's precondition holds only approximately or not at all
// (e.g. Sotomayor check away from Delta = 0).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// A search finished without locating the requested object.
class NotFoundError : public Error {
 public:
  using Error::Error;
};

// An output destination could not be written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace bazykin
