#pragma once

#include <stdexcept>
#include <string>

namespace homsteer {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidOrder : public Error {
  using Error::Error;
};

class InvalidSubgroup : public Error {
  using Error::Error;
};

class InvalidSection : public Error {
  using Error::Error;
};

class InvalidRepresentation : public Error {
  using Error::Error;
};

class DimensionMismatch : public Error {
  using Error::Error;
};

/// A feature map failed the Mackey check where one was required.
class NotInduced : public Error {
 public:
  NotInduced(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// A kernel or integrand violated the symmetry constraint it must obey.
class ConstraintViolation : public Error {
 public:
  ConstraintViolation(const std::string& what, double max_violation)
      : Error(what), max_violation_(max_violation) {}
  double max_violation() const { return max_violation_; }

 private:
  double max_violation_;
};

/// An operator failed the equivariance check; carries the worst witness.
class NotEquivariant : public ConstraintViolation {
 public:
  NotEquivariant(const std::string& what, double deviation, int k, int g)
      : ConstraintViolation(what, deviation), k_(k), g_(g) {}
  int witness_k() const { return k_; }
  int witness_g() const { return g_; }

 private:
  int k_;
  int g_;
};

class UnsupportedGroup : public Error {
  using Error::Error;
};

class UnsupportedReps : public Error {
  using Error::Error;
};

class DegenerateNormalization : public Error {
  using Error::Error;
};

class ConfigError : public Error {
  using Error::Error;
};

}  // namespace homsteer
