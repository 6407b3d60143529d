#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace pasctl {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

using VectorField = std::function<Vec(const Vec&)>;
using MatrixField = std::function<Mat(const Vec&)>;
using ScalarField = std::function<double(const Vec&)>;

/// Energy-like storage function H with gradient eta and Hessian Deta.
struct StorageFunction {
  ScalarField H;
  VectorField eta;
  MatrixField Deta;
};

/// Control-affine plant  z' = f(z) + B(z) u,  y = h(z).
///
/// All callables are pure; a PlantModel may be shared between threads.
struct PlantModel {
  std::string name;
  int n = 0;
  int m = 0;
  VectorField f;
  MatrixField B;
  VectorField h;
  MatrixField Df;
  MatrixField Dh;
  std::optional<StorageFunction> storage;
  /// True when B(z) does not depend on z. Lets controllers differentiate
  /// B B^T eta_c without differentiating B.
  bool constant_input_matrix = false;
};

/// Linear time-invariant port-Hamiltonian plant
///   z' = (J - R) Q z + Bc u,  y = Bc^T Q z,  H(z) = z^T Q z / 2.
class LtiPhPlant {
 public:
  /// Validates skew-symmetry of J, R >= 0 and Q > 0; throws ConfigError.
  LtiPhPlant(Mat J, Mat R, Mat Q, Mat Bc);

  const Mat& J() const { return J_; }
  const Mat& R() const { return R_; }
  const Mat& Q() const { return Q_; }
  const Mat& Bc() const { return Bc_; }
  int n() const { return static_cast<int>(J_.rows()); }
  int m() const { return static_cast<int>(Bc_.cols()); }

  /// (J - R) Q
  Mat A() const { return (J_ - R_) * Q_; }
  /// Bc^T Q
  Mat C() const { return Bc_.transpose() * Q_; }

  PlantModel to_plant(std::string name = "lti-ph") const;

 private:
  Mat J_;
  Mat R_;
  Mat Q_;
  Mat Bc_;
};

/// Central finite-difference Jacobian with step 1e-6 * (1 + |z_i|).
Mat fd_jacobian(const VectorField& g, const Vec& z);

/// Builds a plant from f, B, h only; Df and Dh use fd_jacobian.
PlantModel make_plant(std::string name, int n, int m, VectorField f, MatrixField B,
                      VectorField h, std::optional<StorageFunction> storage = std::nullopt);

/// theta'' = -g sin(theta) - lambda theta' + u with y = B^T eta(z).
PlantModel make_pendulum(double g, double lambda);

/// x'' = mu (1 - x^2) x' - lambda x' - x + u with y = x. Ships without storage.
PlantModel make_van_der_pol(double mu, double lambda);

/// The 2x2 pH system with J = [[0,-1],[1,0]], R = diag(1,0), Q = I, B = (1,-1)^T
/// whose controller violates the combined-storage definiteness condition.
LtiPhPlant counterexample_lti_plant();

/// Named reproducible parameter set: the plant plus its reference initial state.
struct PlantPreset {
  PlantModel plant;
  Vec z0;
};

/// "pendulum-paper", "vdp-paper" or "lti-ph-counterexample"; throws ConfigError otherwise.
PlantPreset plant_preset(const std::string& name);

/// f(z) + B(z) u with dimension checks.
Vec eval_dynamics(const PlantModel& plant, const Vec& z, const Vec& u);

/// (H(z), eta(z)); throws UnsupportedOperation when the plant has no storage.
std::pair<double, Vec> eval_storage(const PlantModel& plant, const Vec& z);

struct Linearization {
  Mat A;
  Mat B0;
  Mat C;
};

/// Df(0), B(0), Dh(0).
Linearization linearize(const PlantModel& plant);

}  // namespace pasctl
