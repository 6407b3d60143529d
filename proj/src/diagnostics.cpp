#include "pasctl/diagnostics.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>

#include <Eigen/LU>

#include "pasctl/errors.hpp"
#include "pasctl/smalllin.hpp"

namespace pasctl {

namespace {

Mat sym_sqrt(const Mat& S) {
  const SymEig e = sym_eig(S);
  const Vec roots = e.values.cwiseMax(0.0).cwiseSqrt();
  return e.vectors * roots.asDiagonal() * e.vectors.transpose();
}

VectorField vfa_gradient(const ValueFunctionApprox& V) {
  return [V](const Vec& z) -> Vec { return V.gradient(z.head<2>()); };
}

using MatX = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

/// One Newton-Kleinman step for the CARE carried out in extended precision.
MatX refine_care_extended(const MatX& A, const MatX& B, const MatX& C, const MatX& P) {
  const Eigen::Index n = A.rows();
  const MatX G = B * B.transpose();
  const MatX At = (A - G * P).transpose();
  const MatX W = C.transpose() * C + P * G * P;
  // vec(At X + X At^T) = (I (x) At + At (x) I) vec(X)
  MatX K = MatX::Zero(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    K.block(i * n, i * n, n, n) += At;
    for (Eigen::Index j = 0; j < n; ++j) {
      K.block(i * n, j * n, n, n).diagonal().array() += At(i, j);
    }
  }
  const MatX rhs = -W.reshaped(n * n, 1);
  const MatX x = K.partialPivLu().solve(rhs);
  const MatX X = x.reshaped(n, n);
  return 0.5L * (X + X.transpose());
}

double hjb_residual(const VectorField& eta_c, const PlantModel& plant, const Vec& z) {
  const Vec eta = eta_c(z);
  const Vec bt_eta = plant.B(z).transpose() * eta;
  return eta.dot(plant.f(z)) - 0.5 * bt_eta.squaredNorm() + 0.5 * plant.h(z).squaredNorm();
}

}  // namespace

LureCertificate lti_lure_certificate(const LtiPhPlant& plant) {
  const Mat L = sym_sqrt(plant.R()) * plant.Q();
  return {[L](const Vec& z) -> Vec { return L * z; }, plant.n()};
}

LureCertificate controller_lure_certificate(const PlantModel& plant, const VectorField& eta_c) {
  return {[plant, eta_c](const Vec& z) -> Vec {
            return (plant.h(z) + plant.B(z).transpose() * eta_c(z)) / std::sqrt(2.0);
          },
          plant.m};
}

void AuditReport::write_csv(std::ostream& os) const {
  const Eigen::Index n = points.empty() ? 0 : points.front().size();
  for (Eigen::Index k = 1; k <= n; ++k) os << "z_" << k << ',';
  os << "residual\n" << std::setprecision(17);
  for (std::size_t i = 0; i < residuals.size(); ++i) {
    if (i < points.size())
      for (Eigen::Index k = 0; k < points[i].size(); ++k) os << points[i](k) << ',';
    os << residuals[i] << '\n';
  }
}

void AuditReport::write_summary(std::ostream& os) const {
  os << "[" << name << "]\n"
     << std::scientific << std::setprecision(6) << "  samples   " << residuals.size() << '\n'
     << "  max_abs   " << max_abs << '\n'
     << "  rms       " << rms << '\n'
     << "  tolerance " << tolerance << '\n'
     << std::defaultfloat << "  verdict   " << (pass ? "pass" : "fail") << '\n';
}

AuditReport make_report(std::string name, std::vector<Vec> points, std::vector<double> residuals,
                        double tolerance) {
  AuditReport r;
  r.name = std::move(name);
  r.points = std::move(points);
  r.residuals = std::move(residuals);
  double sq = 0.0;
  for (double v : r.residuals) {
    r.max_abs = std::max(r.max_abs, std::abs(v));
    sq += v * v;
  }
  r.rms = r.residuals.empty() ? 0.0 : std::sqrt(sq / static_cast<double>(r.residuals.size()));
  r.tolerance = tolerance;
  r.pass = r.max_abs <= tolerance;
  return r;
}

AuditReport hjb_residual_map(const VectorField& eta_c, const PlantModel& plant,
                             const std::vector<Vec>& grid, double tolerance) {
  std::vector<double> res;
  res.reserve(grid.size());
  for (const auto& z : grid) res.push_back(hjb_residual(eta_c, plant, z));
  return make_report("hjb_residual", grid, std::move(res), tolerance);
}

AuditReport hjb_residual_map(const ValueFunctionApprox& V, const PlantModel& plant,
                             const std::vector<Vec>& grid, double tolerance) {
  return hjb_residual_map(vfa_gradient(V), plant, grid, tolerance);
}

AuditReport controller_dissipation_map(const VectorField& eta_c, const PlantModel& plant,
                                       const std::vector<Vec>& grid, double tolerance) {
  const LureCertificate cert = controller_lure_certificate(plant, eta_c);
  std::vector<double> res;
  res.reserve(grid.size());
  for (const auto& z : grid) {
    const Mat B = plant.B(z);
    const Vec eta = eta_c(z);
    const Vec fhat = plant.f(z) - B * (B.transpose() * eta) - B * plant.h(z);
    res.push_back(eta.dot(fhat) + cert.ell(z).squaredNorm());
  }
  return make_report("controller_dissipation", grid, std::move(res), tolerance);
}

AuditReport controller_dissipation_map(const ValueFunctionApprox& V, const PlantModel& plant,
                                       const std::vector<Vec>& grid, double tolerance) {
  return controller_dissipation_map(vfa_gradient(V), plant, grid, tolerance);
}

Condition10Report check_condition_10(const LtiPhPlant& plant) {
  Condition10Report r;
  r.eigenvalues = sym_eig(plant.R() + plant.Bc() * plant.Bc().transpose()).values;
  r.holds = r.eigenvalues.minCoeff() > 0.0;
  return r;
}

CounterexampleReport counterexample_check() { return counterexample_check(counterexample_lti_plant()); }

CounterexampleReport counterexample_check(const LtiPhPlant& plant) {
  const Mat A = plant.A();
  CounterexampleReport r;
  r.P_c = solve_care(A, plant.Bc(), plant.C()).P;
  const Mat S_store = r.P_c + plant.Q();
  r.eigenvalues = sym_eig(A.transpose() * S_store + S_store * A).values.reverse();
  r.indefinite = r.eigenvalues.maxCoeff() > 0.0 && r.eigenvalues.minCoeff() < 0.0;
  return r;
}

PhRealization ph_realizability_lti(const LtiPhPlant& plant) {
  const Mat A = plant.A();
  const Mat& B = plant.Bc();
  const Mat C = plant.C();
  PhRealization r;
  r.P_c = solve_care(A, B, C).P;
  // Throws SingularMatrix for a singular P_c.
  solve_linear(r.P_c, Mat(Mat::Identity(A.rows(), A.rows())));
  const MatX Ax = A.cast<long double>(), Bx = B.cast<long double>(), Cx = C.cast<long double>();
  const MatX P = refine_care_extended(Ax, Bx, Cx, r.P_c.cast<long double>());
  const MatX Ahat = Ax - Bx * Bx.transpose() * P - Bx * Cx;
  // M = Ahat P^{-1}  <=>  P M^T = Ahat^T
  const MatX M = P.partialPivLu().solve(MatX(Ahat.transpose())).transpose();
  r.P_c = P.cast<double>();
  r.J_hat = (0.5L * (M - M.transpose())).cast<double>();
  r.R_hat = (-0.5L * (M + M.transpose())).cast<double>();
  r.min_eig_R_hat = sym_eig(r.R_hat).values.minCoeff();
  r.psd = r.min_eig_R_hat >= -1e-10;
  return r;
}

AuditReport storage_monotonicity(const Trajectory& traj, double tol) {
  std::vector<Vec> points;
  std::vector<double> increases;
  for (std::size_t i = 0; i + 1 < traj.storage.size(); ++i) {
    points.push_back(Vec::Constant(1, traj.grid.t[i + 1]));
    increases.push_back(traj.storage[i + 1] - traj.storage[i]);
  }
  AuditReport r = make_report("storage_monotonicity", std::move(points), increases, tol);
  double worst = -std::numeric_limits<double>::infinity();
  for (double d : increases) worst = std::max(worst, d);
  r.max_abs = increases.empty() ? 0.0 : worst;
  r.pass = increases.empty() || worst <= tol;
  return r;
}

double quadratic_fit_residual(const ScalarField& V, const std::vector<Vec>& grid) {
  if (grid.empty()) throw ConfigError("quadratic_fit_residual: empty grid");
  const auto n = static_cast<Eigen::Index>(grid.size());
  Mat X(n, 6);
  Vec v(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Vec& z = grid[static_cast<std::size_t>(k)];
    X.row(k) << 1.0, z(0), z(1), z(0) * z(0), z(0) * z(1), z(1) * z(1);
    v(k) = V(z);
  }
  const Vec coeffs = X.colPivHouseholderQr().solve(v);
  const double scale = v.norm();
  return scale > 0.0 ? (X * coeffs - v).norm() / scale : 0.0;
}

LtiPhPlant random_lti_ph_plant(int n, int m, unsigned seed) {
  if (n < 1 || m < 1) throw ConfigError("random_lti_ph_plant: sizes must be positive");
  std::mt19937 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto gaussian = [&](int r, int c) {
    Mat X(r, c);
    for (int j = 0; j < c; ++j)
      for (int i = 0; i < r; ++i) X(i, j) = normal(rng);
    return X;
  };
  const Mat G = gaussian(n, n);
  const Mat J = G - G.transpose();
  const int rank = std::uniform_int_distribution<int>(1, n)(rng);
  const Mat L = gaussian(n, rank);
  const Mat K = gaussian(n, n);
  const Mat Q = K * K.transpose() + 0.5 * Mat::Identity(n, n);
  return LtiPhPlant(J, L * L.transpose(), Q, gaussian(n, m));
}

}  // namespace pasctl
