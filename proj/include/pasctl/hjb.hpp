#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "pasctl/galerkin.hpp"
#include "pasctl/models.hpp"

namespace pasctl {

/// Feedback law z -> u.
using Policy = std::function<Vec(const Vec&)>;

struct PolicyIterConfig {
  int degree = 10;
  Rectangle domain;
  double tol_abs = 1e-14;
  double tol_rel = 1e-10;
  int max_iters = 30;
  int test_grid_per_axis = 100;

  void validate() const;
};

struct PolicyIterReport {
  int iterations = 0;
  std::vector<double> delta_abs_history;
  std::vector<double> delta_rel_history;
  /// RMS of the HJB residual over the test grid after each iteration.
  std::vector<double> hjb_residual_history;
  double final_hjb_residual = 0.0;
  ValueFunctionApprox V;
};

struct GalerkinSystem {
  Mat M;
  Vec rhs;
};

/// Assembles the policy-evaluation system for `policy`:
///   M[(r,s),(i,j)] = sum_q w_q grad psi_ij^T (f + B u) psi_rs,
///   rhs[(r,s)]     = -1/2 sum_q w_q (h^T h + u^T u) psi_rs,
/// with the constant mode removed from rows and columns.
GalerkinSystem assemble_system(const PlantModel& plant, const Policy& policy,
                               const LegendreBasis& basis, const QuadratureRule& quad);

/// Solves an assembled system. Throws SingularGalerkinSystem.
ValueFunctionApprox solve_galerkin(const GalerkinSystem& sys, const LegendreBasis& basis);

/// u(z) = -B(z)^T grad V(z).
Policy greedy_policy(const PlantModel& plant, const ValueFunctionApprox& V);

/// Equispaced per-axis samples including both endpoints.
std::vector<Vec> tensor_grid(const Rectangle& domain, int per_axis);

struct StoppingMetrics {
  double delta_abs = 0.0;
  double delta_rel = 0.0;
};

/// delta_abs = max ||u_new - u_old||, delta_rel = delta_abs / max ||u_old||
/// (+inf when u_old vanishes on the grid).
StoppingMetrics stopping_metrics(const Policy& u_new, const Policy& u_old,
                                 const std::vector<Vec>& grid);

/// Pointwise HJB residual eta^T f - 1/2 |B^T eta|^2 + 1/2 |h|^2.
double hjb_residual_at(const PlantModel& plant, const ValueFunctionApprox& V, const Vec& z);

/// Galerkin policy iteration started from the LQR policy of the linearization.
/// The returned V is anchored (grad V(0) = 0).
/// Writes one log line per iteration to `log` when non-null. Throws
/// NonConvergence (message carries the history) after max_iters.
PolicyIterReport policy_iteration(const PlantModel& plant, const PolicyIterConfig& cfg,
                                  std::ostream* log = nullptr);

}  // namespace pasctl
