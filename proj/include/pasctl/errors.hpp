#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace pasctl {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user input: dimension mismatch, bad config value, unknown key.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class UnsupportedOperation : public Error {
 public:
  using Error::Error;
};

class SingularMatrix : public Error {
 public:
  using Error::Error;
};

class NotHurwitz : public Error {
 public:
  using Error::Error;
};

class NoStabilizingSolution : public Error {
 public:
  using Error::Error;
};

class SingularGalerkinSystem : public Error {
 public:
  using Error::Error;
};

class CovarianceError : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

/// Raised when policy iteration exhausts its budget; carries the per-iteration
/// delta_abs history.
class NonConvergence : public Error {
 public:
  explicit NonConvergence(const std::string& what, std::vector<double> history = {})
      : Error(what), history_(std::move(history)) {}

  const std::vector<double>& history() const { return history_; }

 private:
  std::vector<double> history_;
};

/// Newton iteration failed to reach its tolerance. Carries the last iterate
/// and its residual norm so callers can report them.
class NewtonDivergence : public Error {
 public:
  NewtonDivergence(const std::string& what, Eigen::VectorXd last_iterate,
                   double residual_norm, int iterations)
      : Error(what),
        last_iterate_(std::move(last_iterate)),
        residual_norm_(residual_norm),
        iterations_(iterations) {}

  const Eigen::VectorXd& last_iterate() const { return last_iterate_; }
  double residual_norm() const { return residual_norm_; }
  int iterations() const { return iterations_; }

 private:
  Eigen::VectorXd last_iterate_;
  double residual_norm_;
  int iterations_;
};

}  // namespace pasctl
