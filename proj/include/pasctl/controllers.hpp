#pragma once

#include <utility>

#include "pasctl/galerkin.hpp"
#include "pasctl/models.hpp"

namespace pasctl {

/// Observer-based controller with observer gain B:
///   zhat' = f(zhat) - B B^T eta_c(zhat) + B (uhat - h(zhat)),
///   yhat  = B(zhat)^T eta_c(zhat).
/// Passive with storage V regardless of the plant structure.
class PassiveController {
 public:
  PassiveController(PlantModel plant, ValueFunctionApprox V);

  const PlantModel& plant() const { return plant_; }
  const ValueFunctionApprox& value_function() const { return V_; }

  struct Rhs {
    Vec state_dot;
    Vec output;
  };
  Rhs rhs(const Vec& zhat, const Vec& uhat) const;

  /// yhat = B(zhat)^T eta_c(zhat)
  Vec output(const Vec& zhat) const;
  /// Autonomous part fhat = f - B B^T eta_c - B h.
  Vec drift(const Vec& zhat) const;
  /// Jacobian of fhat.
  Mat drift_jacobian(const Vec& zhat) const;
  /// Storage V(zhat) (shifted so that V(0) = 0), with gradient and Hessian.
  StorageFunction storage() const { return V_.as_storage(); }

 private:
  PlantModel plant_;
  ValueFunctionApprox V_;
};

/// Luenberger observer with extended-Kalman-filter gain K = Pi H^T R^-1:
///   zbar' = f(zbar) - B B^T eta_c(zbar) + K (ubar - h(zbar)),
///   ybar  = B(zbar)^T eta_c(zbar),
///   Pi'   = F Pi + Pi F^T - Pi H^T R^-1 H Pi + Q,
/// F = D(f - B B^T eta_c)(zbar), H = Dh(zbar).
class EkfController {
 public:
  EkfController(PlantModel plant, ValueFunctionApprox V, Mat process_weight,
                Mat measurement_weight);
  /// Q = I_n, R = I_m.
  EkfController(PlantModel plant, ValueFunctionApprox V);

  const PlantModel& plant() const { return plant_; }

  struct Rhs {
    Vec state_dot;
    Mat covariance_dot;
    Vec output;
  };
  /// Throws CovarianceError when Pi is not symmetric positive semidefinite.
  Rhs rhs(const Vec& zbar, const Mat& Pi, const Vec& ubar) const;

  Vec output(const Vec& zbar) const;
  /// D(f - B B^T eta_c)(zbar)
  Mat linearized_drift(const Vec& zbar) const;

 private:
  PlantModel plant_;
  ValueFunctionApprox V_;
  Mat Qw_;
  Mat Rv_inv_;
};

/// u*(z) = -B(z)^T grad V(z)
Vec optimal_feedback(const ValueFunctionApprox& V, const PlantModel& plant, const Vec& z);

enum class ControllerKind { none, passive, ekf };

/// Plant coupled to a controller through uhat = y, u = -yhat.
///
/// State layout: [z (n) | controller state (n) | Pi column-major (n*n)]; the
/// controller block is absent for `none` and the Pi block only exists for `ekf`.
class ClosedLoop {
 public:
  explicit ClosedLoop(PlantModel plant);
  ClosedLoop(PlantModel plant, PassiveController controller);
  ClosedLoop(PlantModel plant, EkfController controller);

  ControllerKind kind() const { return kind_; }
  int state_size() const;
  const PlantModel& plant() const { return plant_; }

  /// Initial stacked state: plant z0, controller zc0, and Pi0 for the EKF.
  Vec initial_state(const Vec& z0, const Vec& zc0, const Mat& Pi0) const;

  Vec rhs(const Vec& x) const;

  /// Plant input u = -yhat at stacked state x (zero when uncontrolled).
  Vec plant_input(const Vec& x) const;
  Vec plant_output(const Vec& x) const { return plant_.h(x.head(plant_.n)); }
  Vec controller_state(const Vec& x) const;
  Mat covariance(const Vec& x) const;

 private:
  PlantModel plant_;
  ControllerKind kind_ = ControllerKind::none;
  std::optional<PassiveController> passive_;
  std::optional<EkfController> ekf_;
};

}  // namespace pasctl
