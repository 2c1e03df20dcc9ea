#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace dwdob {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Task-space force/moment vector, forces first then moments. Used for the
// measured contact wrench, commands, residuals and disturbance estimates.
using Wrench = Eigen::VectorXd;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularTaskInertia : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class NotPositiveDefinite : public Error {
 public:
  using Error::Error;
};

class StreamRateMismatch : public Error {
 public:
  using Error::Error;
};

class ConfigInvalid : public Error {
 public:
  ConfigInvalid(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

class IncompatibleScenarios : public Error {
 public:
  using Error::Error;
};

}  // namespace dwdob
