#pragma once

#include <stdexcept>
#include <string>

namespace qcompat {

// Base of every error thrown by the library. Callers that only care about
// "something went wrong" can catch this one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonHermitian : public Error {
 public:
  NonHermitian(double deviation, double norm);
  double deviation() const noexcept { return deviation_; }

 private:
  double deviation_;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class SingularLog : public Error {
 public:
  explicit SingularLog(double min_eigenvalue);
  double min_eigenvalue() const noexcept { return min_eigenvalue_; }

 private:
  double min_eigenvalue_;
};

class NotCommuting : public Error {
 public:
  using Error::Error;
};

// A density-matrix (or file) invariant failed; carries the measured quantity.
class ValidationError : public Error {
 public:
  ValidationError(std::string label, std::string invariant, double measured);
  const std::string& label() const noexcept { return label_; }
  const std::string& invariant() const noexcept { return invariant_; }
  double measured() const noexcept { return measured_; }

 private:
  std::string label_;
  std::string invariant_;
  double measured_;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class Infeasible : public Error {
 public:
  Infeasible(const std::string& what, double violation)
      : Error(what), violation_(violation) {}
  double violation() const noexcept { return violation_; }

 private:
  double violation_;
};

class Incompatible : public Error {
 public:
  using Error::Error;
};

// The SDP solver stopped without an Optimal status.
class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace qcompat
