#include "pasctl/controllers.hpp"

#include "pasctl/errors.hpp"
#include "pasctl/smalllin.hpp"

namespace pasctl {

namespace {

void require_planar(const PlantModel& plant, const char* who) {
  if (plant.n != 2) {
    throw ConfigError(std::string(who) + ": value-function controllers need a 2D plant");
  }
}

}  // namespace

PassiveController::PassiveController(PlantModel plant, ValueFunctionApprox V)
    : plant_(std::move(plant)), V_(std::move(V)) {
  require_planar(plant_, "PassiveController");
}

Vec PassiveController::output(const Vec& zhat) const {
  return plant_.B(zhat).transpose() * Vec(V_.gradient(zhat.head<2>()));
}

Vec PassiveController::drift(const Vec& zhat) const {
  const Mat B = plant_.B(zhat);
  const Vec eta = V_.gradient(zhat.head<2>());
  return plant_.f(zhat) - B * (B.transpose() * eta) - B * plant_.h(zhat);
}

Mat PassiveController::drift_jacobian(const Vec& zhat) const {
  if (!plant_.constant_input_matrix) {
    return fd_jacobian([this](const Vec& z) { return drift(z); }, zhat);
  }
  const Mat B = plant_.B(zhat);
  const Mat hess = V_.eval(zhat.head<2>()).hessian;
  return plant_.Df(zhat) - B * B.transpose() * hess - B * plant_.Dh(zhat);
}

PassiveController::Rhs PassiveController::rhs(const Vec& zhat, const Vec& uhat) const {
  const Mat B = plant_.B(zhat);
  const Vec eta = V_.gradient(zhat.head<2>());
  const Vec yhat = B.transpose() * eta;
  return {plant_.f(zhat) - B * yhat + B * (uhat - plant_.h(zhat)), yhat};
}

EkfController::EkfController(PlantModel plant, ValueFunctionApprox V, Mat process_weight,
                             Mat measurement_weight)
    : plant_(std::move(plant)), V_(std::move(V)), Qw_(std::move(process_weight)) {
  require_planar(plant_, "EkfController");
  if (Qw_.rows() != plant_.n || Qw_.cols() != plant_.n || measurement_weight.rows() != plant_.m ||
      measurement_weight.cols() != plant_.m) {
    throw ConfigError("EkfController: weight dimensions do not match the plant");
  }
  Rv_inv_ = solve_linear(measurement_weight, Mat(Mat::Identity(plant_.m, plant_.m)));
}

EkfController::EkfController(PlantModel plant, ValueFunctionApprox V)
    : EkfController(plant, std::move(V), Mat::Identity(plant.n, plant.n),
                    Mat::Identity(plant.m, plant.m)) {}

Vec EkfController::output(const Vec& zbar) const {
  return plant_.B(zbar).transpose() * Vec(V_.gradient(zbar.head<2>()));
}

Mat EkfController::linearized_drift(const Vec& zbar) const {
  if (!plant_.constant_input_matrix) {
    auto g = [this](const Vec& z) -> Vec {
      const Mat B = plant_.B(z);
      return plant_.f(z) - B * (B.transpose() * Vec(V_.gradient(z.head<2>())));
    };
    return fd_jacobian(g, zbar);
  }
  const Mat B = plant_.B(zbar);
  return plant_.Df(zbar) - B * B.transpose() * V_.eval(zbar.head<2>()).hessian;
}

EkfController::Rhs EkfController::rhs(const Vec& zbar, const Mat& Pi, const Vec& ubar) const {
  const double scale = 1.0 + Pi.norm();
  if ((Pi - Pi.transpose()).norm() > 1e-8 * scale) {
    throw CovarianceError("EKF covariance is not symmetric");
  }
  if (sym_eig(Pi).values.minCoeff() < -1e-8 * scale) {
    throw CovarianceError("EKF covariance is not positive semidefinite");
  }
  const Mat B = plant_.B(zbar);
  const Vec eta = V_.gradient(zbar.head<2>());
  const Vec ybar = B.transpose() * eta;
  const Mat H = plant_.Dh(zbar);
  const Mat F = linearized_drift(zbar);
  const Mat K = Pi * H.transpose() * Rv_inv_;

  Rhs out;
  out.state_dot = plant_.f(zbar) - B * ybar + K * (ubar - plant_.h(zbar));
  out.covariance_dot = F * Pi + Pi * F.transpose() - K * H * Pi + Qw_;
  out.output = ybar;
  return out;
}

Vec optimal_feedback(const ValueFunctionApprox& V, const PlantModel& plant, const Vec& z) {
  return -plant.B(z).transpose() * Vec(V.gradient(z.head<2>()));
}

ClosedLoop::ClosedLoop(PlantModel plant) : plant_(std::move(plant)) {}

ClosedLoop::ClosedLoop(PlantModel plant, PassiveController controller)
    : plant_(std::move(plant)), kind_(ControllerKind::passive), passive_(std::move(controller)) {
  if (passive_->plant().n != plant_.n || passive_->plant().m != plant_.m) {
    throw ConfigError("ClosedLoop: controller model does not match plant dimensions");
  }
}

ClosedLoop::ClosedLoop(PlantModel plant, EkfController controller)
    : plant_(std::move(plant)), kind_(ControllerKind::ekf), ekf_(std::move(controller)) {
  if (ekf_->plant().n != plant_.n || ekf_->plant().m != plant_.m) {
    throw ConfigError("ClosedLoop: controller model does not match plant dimensions");
  }
}

int ClosedLoop::state_size() const {
  const int n = plant_.n;
  switch (kind_) {
    case ControllerKind::none:
      return n;
    case ControllerKind::passive:
      return 2 * n;
    case ControllerKind::ekf:
      return 2 * n + n * n;
  }
  return n;
}

Vec ClosedLoop::initial_state(const Vec& z0, const Vec& zc0, const Mat& Pi0) const {
  const int n = plant_.n;
  Vec x = Vec::Zero(state_size());
  x.head(n) = z0;
  if (kind_ != ControllerKind::none) x.segment(n, n) = zc0;
  if (kind_ == ControllerKind::ekf) x.tail(n * n) = Eigen::Map<const Vec>(Pi0.data(), n * n);
  return x;
}

Vec ClosedLoop::controller_state(const Vec& x) const {
  if (kind_ == ControllerKind::none) return Vec();
  return x.segment(plant_.n, plant_.n);
}

Mat ClosedLoop::covariance(const Vec& x) const {
  const int n = plant_.n;
  if (kind_ != ControllerKind::ekf) return Mat();
  const Mat Pi = Eigen::Map<const Mat>(x.tail(n * n).data(), n, n);
  return Pi;
}

Vec ClosedLoop::plant_input(const Vec& x) const {
  switch (kind_) {
    case ControllerKind::none:
      return Vec::Zero(plant_.m);
    case ControllerKind::passive:
      return -passive_->output(controller_state(x));
    case ControllerKind::ekf:
      return -ekf_->output(controller_state(x));
  }
  return Vec::Zero(plant_.m);
}

Vec ClosedLoop::rhs(const Vec& x) const {
  const int n = plant_.n;
  const Vec z = x.head(n);
  const Vec y = plant_.h(z);
  Vec xdot(x.size());
  switch (kind_) {
    case ControllerKind::none:
      xdot = plant_.f(z);
      break;
    case ControllerKind::passive: {
      const auto c = passive_->rhs(x.segment(n, n), y);
      xdot.head(n) = plant_.f(z) - plant_.B(z) * c.output;
      xdot.segment(n, n) = c.state_dot;
      break;
    }
    case ControllerKind::ekf: {
      // The exact flow keeps Pi symmetric; symmetrize so that off-manifold
      // trial points of the implicit solver stay admissible.
      const Mat Pi_raw = covariance(x);
      const Mat Pi = 0.5 * (Pi_raw + Pi_raw.transpose());
      const auto c = ekf_->rhs(x.segment(n, n), Pi, y);
      xdot.head(n) = plant_.f(z) - plant_.B(z) * c.output;
      xdot.segment(n, n) = c.state_dot;
      xdot.tail(n * n) = Eigen::Map<const Vec>(c.covariance_dot.data(), n * n);
      break;
    }
  }
  return xdot;
}

}  // namespace pasctl
