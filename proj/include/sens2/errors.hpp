#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <utility>

namespace sens2 {

/// Base class for every error raised by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A callback was evaluated outside the model's admissible region
/// (parameter box, non-finite input, nonpositive conductivity, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Newton iteration budget exhausted or the line search stalled.
class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& what, Eigen::VectorXd best_iterate,
                 double residual_norm, int iterations)
      : Error(what),
        best_iterate_(std::move(best_iterate)),
        residual_norm_(residual_norm),
        iterations_(iterations) {}

  const Eigen::VectorXd& best_iterate() const noexcept { return best_iterate_; }
  double residual_norm() const noexcept { return residual_norm_; }
  int iterations() const noexcept { return iterations_; }

 private:
  Eigen::VectorXd best_iterate_;
  double residual_norm_;
  int iterations_;
};

/// LU factorization hit a pivot below the singularity threshold.
class SingularJacobian : public Error {
 public:
  explicit SingularJacobian(const std::string& what, Eigen::VectorXd iterate = {})
      : Error(what), iterate_(std::move(iterate)) {}

  const Eigen::VectorXd& iterate() const noexcept { return iterate_; }

 private:
  Eigen::VectorXd iterate_;
};

/// Invalid run configuration; `field` names the offending entry when known.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, std::string field = {})
      : Error(what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace sens2
