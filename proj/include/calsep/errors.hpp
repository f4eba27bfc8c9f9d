#pragma once

#include <stdexcept>
#include <string>

namespace calsep {

// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// A factorization did not converge.
class NumericalFailure : public Error {
 public:
  NumericalFailure(const std::string& what, long dim)
      : Error(what + " (dim " + std::to_string(dim) + ")"), dim_(dim) {}
  long dim() const noexcept { return dim_; }

 private:
  long dim_;
};

// Rank-deficient input where full rank is required.
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

class NotPositiveDefinite : public Error {
 public:
  using Error::Error;
};

// Objective evaluated where it is undefined (A^T Sigma A not PD).
class DomainError : public Error {
 public:
  using Error::Error;
};

class NotOnManifold : public Error {
 public:
  using Error::Error;
};

// A high-level variable has no admissible low-level support.
class StructuralInfeasibility : public Error {
 public:
  StructuralInfeasibility(const std::string& what, long column)
      : Error(what), column_(column) {}
  long column() const noexcept { return column_; }

 private:
  long column_;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace calsep
