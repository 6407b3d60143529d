#include "pasctl/models.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "pasctl/errors.hpp"

namespace pasctl {

LtiPhPlant::LtiPhPlant(Mat J, Mat R, Mat Q, Mat Bc)
    : J_(std::move(J)), R_(std::move(R)), Q_(std::move(Q)), Bc_(std::move(Bc)) {
  const auto n = J_.rows();
  if (n == 0 || J_.cols() != n || R_.rows() != n || R_.cols() != n || Q_.rows() != n ||
      Q_.cols() != n || Bc_.rows() != n || Bc_.cols() == 0) {
    throw ConfigError("LtiPhPlant: inconsistent matrix dimensions");
  }
  if ((J_ + J_.transpose()).norm() != 0.0) {
    throw ConfigError("LtiPhPlant: J must be skew-symmetric");
  }
  if ((R_ - R_.transpose()).norm() > 1e-14 * (1.0 + R_.norm()) ||
      (Q_ - Q_.transpose()).norm() > 1e-14 * (1.0 + Q_.norm())) {
    throw ConfigError("LtiPhPlant: R and Q must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat> eig_r(R_, Eigen::EigenvaluesOnly);
  if (eig_r.eigenvalues().minCoeff() < -1e-12) {
    throw ConfigError("LtiPhPlant: R must be positive semidefinite");
  }
  Eigen::SelfAdjointEigenSolver<Mat> eig_q(Q_, Eigen::EigenvaluesOnly);
  if (eig_q.eigenvalues().minCoeff() <= 0.0) {
    throw ConfigError("LtiPhPlant: Q must be positive definite");
  }
}

PlantModel LtiPhPlant::to_plant(std::string name) const {
  const Mat A = this->A();
  const Mat C = this->C();
  const Mat Bc = Bc_;
  const Mat Q = Q_;

  PlantModel p;
  p.name = std::move(name);
  p.n = n();
  p.m = m();
  p.f = [A](const Vec& z) -> Vec { return A * z; };
  p.B = [Bc](const Vec&) -> Mat { return Bc; };
  p.h = [C](const Vec& z) -> Vec { return C * z; };
  p.Df = [A](const Vec&) -> Mat { return A; };
  p.Dh = [C](const Vec&) -> Mat { return C; };
  p.storage = StorageFunction{
      [Q](const Vec& z) { return 0.5 * z.dot(Q * z); },
      [Q](const Vec& z) -> Vec { return Q * z; },
      [Q](const Vec&) -> Mat { return Q; },
  };
  p.constant_input_matrix = true;
  return p;
}

Mat fd_jacobian(const VectorField& g, const Vec& z) {
  const Vec g0 = g(z);
  Mat jac(g0.size(), z.size());
  Vec zp = z;
  Vec zm = z;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double h = 1e-6 * (1.0 + std::abs(z(i)));
    zp(i) = z(i) + h;
    zm(i) = z(i) - h;
    jac.col(i) = (g(zp) - g(zm)) / (2.0 * h);
    zp(i) = z(i);
    zm(i) = z(i);
  }
  return jac;
}

PlantModel make_plant(std::string name, int n, int m, VectorField f, MatrixField B,
                      VectorField h, std::optional<StorageFunction> storage) {
  if (n <= 0 || m <= 0) throw ConfigError("make_plant: dimensions must be positive");
  PlantModel p;
  p.name = std::move(name);
  p.n = n;
  p.m = m;
  p.f = std::move(f);
  p.B = std::move(B);
  p.h = std::move(h);
  p.Df = [f = p.f](const Vec& z) { return fd_jacobian(f, z); };
  p.Dh = [h = p.h](const Vec& z) { return fd_jacobian(h, z); };
  p.storage = std::move(storage);
  return p;
}

PlantModel make_pendulum(double g, double lambda) {
  PlantModel p;
  p.name = "pendulum";
  p.n = 2;
  p.m = 1;
  p.f = [g, lambda](const Vec& z) -> Vec {
    return Eigen::Vector2d(z(1), -g * std::sin(z(0)) - lambda * z(1));
  };
  p.B = [](const Vec&) -> Mat { return Eigen::Vector2d(0.0, 1.0); };
  // y = B^T eta(z) = z_2
  p.h = [](const Vec& z) -> Vec { return Vec::Constant(1, z(1)); };
  p.Df = [g, lambda](const Vec& z) -> Mat {
    Mat d(2, 2);
    d << 0.0, 1.0, -g * std::cos(z(0)), -lambda;
    return d;
  };
  p.Dh = [](const Vec&) -> Mat {
    Mat d(1, 2);
    d << 0.0, 1.0;
    return d;
  };
  p.storage = StorageFunction{
      [g](const Vec& z) { return g * (1.0 - std::cos(z(0))) + 0.5 * z(1) * z(1); },
      [g](const Vec& z) -> Vec { return Eigen::Vector2d(g * std::sin(z(0)), z(1)); },
      [g](const Vec& z) -> Mat {
        Mat d = Mat::Zero(2, 2);
        d(0, 0) = g * std::cos(z(0));
        d(1, 1) = 1.0;
        return d;
      },
  };
  p.constant_input_matrix = true;
  return p;
}

PlantModel make_van_der_pol(double mu, double lambda) {
  PlantModel p;
  p.name = "van-der-pol";
  p.n = 2;
  p.m = 1;
  p.f = [mu, lambda](const Vec& z) -> Vec {
    return Eigen::Vector2d(z(1), mu * (1.0 - z(0) * z(0)) * z(1) - lambda * z(1) - z(0));
  };
  p.B = [](const Vec&) -> Mat { return Eigen::Vector2d(0.0, 1.0); };
  p.h = [](const Vec& z) -> Vec { return Vec::Constant(1, z(0)); };
  p.Df = [mu, lambda](const Vec& z) -> Mat {
    Mat d(2, 2);
    d << 0.0, 1.0, -2.0 * mu * z(0) * z(1) - 1.0, mu * (1.0 - z(0) * z(0)) - lambda;
    return d;
  };
  p.Dh = [](const Vec&) -> Mat {
    Mat d(1, 2);
    d << 1.0, 0.0;
    return d;
  };
  p.constant_input_matrix = true;
  return p;
}

LtiPhPlant counterexample_lti_plant() {
  Mat J(2, 2), R(2, 2), B(2, 1);
  J << 0.0, -1.0, 1.0, 0.0;
  R << 1.0, 0.0, 0.0, 0.0;
  B << 1.0, -1.0;
  return LtiPhPlant(J, R, Mat::Identity(2, 2), B);
}

PlantPreset plant_preset(const std::string& name) {
  if (name == "pendulum-paper") {
    auto p = make_pendulum(9.81, 0.2);
    p.name = name;
    return {std::move(p), Eigen::Vector2d(std::numbers::pi / 4.0, -1.0)};
  }
  if (name == "vdp-paper") {
    auto p = make_van_der_pol(2.0, 1.6);
    p.name = name;
    return {std::move(p), Eigen::Vector2d(1.0, -0.5)};
  }
  if (name == "lti-ph-counterexample") {
    return {counterexample_lti_plant().to_plant(name), Eigen::Vector2d(1.0, -0.5)};
  }
  throw ConfigError("unknown plant preset '" + name + "'");
}

Vec eval_dynamics(const PlantModel& plant, const Vec& z, const Vec& u) {
  if (z.size() != plant.n || u.size() != plant.m) {
    throw ConfigError("eval_dynamics: expected state of size " + std::to_string(plant.n) +
                      " and input of size " + std::to_string(plant.m));
  }
  return plant.f(z) + plant.B(z) * u;
}

std::pair<double, Vec> eval_storage(const PlantModel& plant, const Vec& z) {
  if (!plant.storage) {
    throw UnsupportedOperation("plant '" + plant.name + "' has no storage function");
  }
  if (z.size() != plant.n) throw ConfigError("eval_storage: state dimension mismatch");
  return {plant.storage->H(z), plant.storage->eta(z)};
}

Linearization linearize(const PlantModel& plant) {
  const Vec zero = Vec::Zero(plant.n);
  return {plant.Df(zero), plant.B(zero), plant.Dh(zero)};
}

}  // namespace pasctl
