#ifndef BCT_ERROR_HPP
#define BCT_ERROR_HPP

#include <stdexcept>
#include <string>

namespace bct {

// Base for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A tree violates properness or prefix-freeness.
class StructuralError : public Error {
 public:
  using Error::Error;
};

// A requested enumeration or state space is too large.
class CapacityError : public Error {
 public:
  using Error::Error;
};

// Input symbols or files are malformed.
class DataError : public Error {
 public:
  using Error::Error;
};

// An argument is outside the domain of the operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// A functional produced an unusable value.
class EstimationError : public Error {
 public:
  using Error::Error;
};

}  // namespace bct

#endif  // BCT_ERROR_HPP
