#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "pasctl/galerkin.hpp"
#include "pasctl/integrators.hpp"
#include "pasctl/models.hpp"

namespace pasctl {

/// Dissipation certificate ell: eta^T f + ell^T ell = 0 for a passive drift.
struct LureCertificate {
  VectorField ell;
  int p = 0;
};

/// ell(z) = R^{1/2} Q z for an LTI pH plant (p = n).
LureCertificate lti_lure_certificate(const LtiPhPlant& plant);

/// ell_hat = (h + B^T eta_c) / sqrt(2) of the passive controller.
LureCertificate controller_lure_certificate(const PlantModel& plant, const VectorField& eta_c);

struct AuditReport {
  std::string name;
  std::vector<Vec> points;
  std::vector<double> residuals;
  double max_abs = 0.0;
  double rms = 0.0;
  double tolerance = 0.0;
  bool pass = false;

  /// Header "z_1,...,z_n,residual", 17 significant digits.
  void write_csv(std::ostream& os) const;
  /// One human-readable summary block.
  void write_summary(std::ostream& os) const;
};

/// Builds a report from pointwise residuals; pass <=> max |residual| <= tolerance.
AuditReport make_report(std::string name, std::vector<Vec> points, std::vector<double> residuals,
                        double tolerance);

/// eta^T f - 1/2 eta^T B B^T eta + 1/2 h^T h on each grid point.
AuditReport hjb_residual_map(const VectorField& eta_c, const PlantModel& plant,
                             const std::vector<Vec>& grid, double tolerance = 0.0);
AuditReport hjb_residual_map(const ValueFunctionApprox& V, const PlantModel& plant,
                             const std::vector<Vec>& grid, double tolerance = 0.0);

/// eta_c^T fhat + |ell_hat|^2 on each grid point, fhat = f - B B^T eta_c - B h.
AuditReport controller_dissipation_map(const VectorField& eta_c, const PlantModel& plant,
                                       const std::vector<Vec>& grid, double tolerance = 0.0);
AuditReport controller_dissipation_map(const ValueFunctionApprox& V, const PlantModel& plant,
                                       const std::vector<Vec>& grid, double tolerance = 0.0);

struct Condition10Report {
  bool holds = false;
  Vec eigenvalues;  // of R + Bc Bc^T, ascending
};

/// R + Bc Bc^T > 0.
Condition10Report check_condition_10(const LtiPhPlant& plant);

struct CounterexampleReport {
  Mat P_c;
  Vec eigenvalues;  // of A^T (P_c + Q) + (P_c + Q) A, descending
  bool indefinite = false;
};

/// Combined-storage definiteness test on the built-in 2x2 counterexample.
CounterexampleReport counterexample_check();
CounterexampleReport counterexample_check(const LtiPhPlant& plant);

struct PhRealization {
  Mat P_c;
  Mat J_hat;
  Mat R_hat;
  double min_eig_R_hat = 0.0;
  bool psd = false;
};

/// Controller realization (J_hat - R_hat) P_c = A - B B^T P_c - B C with
/// M = (A - B B^T P_c - B C) P_c^{-1}, J_hat = skew(M), R_hat = -sym(M).
/// P_c gets one extra Newton-Kleinman step and M is formed in long double.
/// Throws NoStabilizingSolution or SingularMatrix.
PhRealization ph_realizability_lti(const LtiPhPlant& plant);

/// pass <=> H(z_{i+1}) - H(z_i) <= tol for every step; residual i is the increase.
AuditReport storage_monotonicity(const Trajectory& traj, double tol);

/// Relative L2 residual ||V - q|| / ||V|| of the least-squares fit of V by a
/// full quadratic polynomial q in two variables over the grid points.
double quadratic_fit_residual(const ScalarField& V, const std::vector<Vec>& grid);

/// Seeded random LTI pH plant with n states and m inputs: J skew, R = L L^T of
/// random rank, Q = K K^T + I / 2, Gaussian Bc.
LtiPhPlant random_lti_ph_plant(int n, int m, unsigned seed);

}  // namespace pasctl
