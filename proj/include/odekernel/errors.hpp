#ifndef ODEKERNEL_ERRORS_HPP
#define ODEKERNEL_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace odekernel {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidGridError : public Error {
 public:
  using Error::Error;
};

/// P_theta is singular or its condition estimate exceeds the cap.
class SingularOperatorError : public Error {
 public:
  SingularOperatorError(const std::string& what, std::vector<double> coefficients)
      : Error(what), coefficients_(std::move(coefficients)) {}
  const std::vector<double>& coefficients() const { return coefficients_; }

 private:
  std::vector<double> coefficients_;
};

class UnderdeterminedSmootherError : public Error {
 public:
  using Error::Error;
};

class OutOfSpanError : public Error {
 public:
  using Error::Error;
};

class InvalidParameterError : public Error {
 public:
  using Error::Error;
};

class GradientUnavailableError : public Error {
 public:
  GradientUnavailableError(const std::string& what, int coordinate)
      : Error(what), coordinate_(coordinate) {}
  int coordinate() const { return coordinate_; }

 private:
  int coordinate_;
};

class NoFeasibleStartError : public Error {
 public:
  using Error::Error;
};

/// Raised when the Hessian cannot be inverted; carries the offending directions.
class CovarianceUnavailableError : public Error {
 public:
  CovarianceUnavailableError(const std::string& what,
                             std::vector<std::vector<double>> null_directions)
      : Error(what), null_directions_(std::move(null_directions)) {}
  const std::vector<std::vector<double>>& null_directions() const { return null_directions_; }

 private:
  std::vector<std::vector<double>> null_directions_;
};

class IntegrationDivergedError : public Error {
 public:
  IntegrationDivergedError(const std::string& what, double time) : Error(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

/// Michaelis-Menten denominator beta_3 + eta(t) fell below the guard.
class DivisionGuardError : public Error {
 public:
  using Error::Error;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace odekernel

#endif  // ODEKERNEL_ERRORS_HPP
