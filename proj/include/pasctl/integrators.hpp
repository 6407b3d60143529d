#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include "pasctl/controllers.hpp"
#include "pasctl/models.hpp"

namespace pasctl {

struct NewtonOptions {
  /// Stop once ||residual|| <= tol.
  double tol = 1e-12;
  int max_iter = 50;
  /// Extra iterations after reaching tol; each is kept only if it lowers the
  /// residual norm. Drives implicit steps down to round-off.
  int polish = 0;
  /// Run exactly this many iterations before the tolerance check (0 = off).
  int fixed_iterations = 0;
  /// Accept an iterate with ||residual|| <= stall_tol once a step fails to
  /// halve the residual (round-off floor). 0 = off.
  double stall_tol = 0.0;
};

struct NewtonResult {
  Vec x;
  double residual_norm = 0.0;
  int iterations = 0;
};

/// Newton's method for residual(x) = 0. An empty `jacobian` selects central
/// finite differences. Throws NewtonDivergence.
NewtonResult newton_solve(const VectorField& residual, const MatrixField& jacobian, Vec x0,
                          const NewtonOptions& opts = {});

/// Two-point discrete gradient
///   eta((z1+z2)/2) + [H(z2) - H(z1) - eta((z1+z2)/2)^T dz] / |dz|^2 * dz,
/// with the midpoint gradient used when |dz| < 1e-12 (1 + |z1|).
Vec discrete_gradient(const ScalarField& H, const VectorField& eta, const Vec& z1,
                      const Vec& z2);

/// A passive system  z' = drift(z) + B(z) u  with storage H, written as
/// drift = -r o eta for the resistive map r = -drift o eta^{-1}.
struct DgSystem {
  StorageFunction storage;
  VectorField drift;
  MatrixField B;
  /// eta^{-1} is only trusted inside [lo, hi] (componentwise).
  std::optional<std::pair<Vec, Vec>> trust_box;
};

/// Passive controller as a DgSystem; eta_c inversion trusted on the Galerkin
/// domain scaled by `trust_factor`.
DgSystem controller_dg_system(const PassiveController& controller, double trust_factor = 1.5);

/// Plant with storage as a DgSystem. Throws UnsupportedOperation otherwise.
DgSystem plant_dg_system(const PlantModel& plant,
                         std::optional<std::pair<Vec, Vec>> trust_box = std::nullopt);

/// Solves eta(z) = v by 10 Newton steps from `z_hint` using the Hessian,
/// then checks ||eta(z) - v|| <= 1e-11. Throws NewtonDivergence or RangeError.
Vec invert_gradient(const DgSystem& sys, const Vec& v, const Vec& z_hint);

/// r(v) = -drift(eta^{-1}(v)).
Vec eval_r(const DgSystem& sys, const Vec& v, const Vec& z_hint);

/// One step of the passivity-preserving scheme together with the terms of
/// its discrete power balance.
struct DgStep {
  Vec z_next;
  Vec eta_bar;
  Vec r;
  Vec y_bar;
  double storage_rate = 0.0;  // (H(z_{i+1}) - H(z_i)) / dt
  double dissipation = 0.0;   // eta_bar^T r(eta_bar)
  double supply = 0.0;        // y_bar^T u_bar
  /// storage_rate + dissipation - supply (zero in exact arithmetic).
  double balance_defect() const { return storage_rate + dissipation - supply; }
};

/// Solves z' = z - dt r(eta_bar(z, z')) + dt B((z + z')/2) u_bar by Newton with a
/// finite-difference Jacobian, starting from the explicit Euler predictor.
DgStep dg_step(const DgSystem& sys, const Vec& z, const Vec& u_bar, double dt);

/// Right-hand side with an explicit input argument.
using InputRhs = std::function<Vec(const Vec& x, const Vec& u)>;
using InputSignal = std::function<Vec(double t)>;

/// Implicit midpoint step  x' = x + dt rhs((x + x')/2, u_bar).
Vec midpoint_step(const InputRhs& rhs, const Vec& x, double dt, const Vec& u_bar);

struct TimeGrid {
  std::vector<double> t;

  /// m points on [0, T]. Throws ConfigError for m < 2 or T <= 0.
  static TimeGrid uniform(double T, int m);
  void validate() const;
  std::size_t size() const { return t.size(); }
};

struct Trajectory {
  TimeGrid grid;
  std::vector<Vec> states;
  std::vector<Vec> inputs;
  std::vector<Vec> outputs;
  std::vector<double> storage;
  /// Per node; entry i > 0 refers to the step ending at node i, entry 0 is 0.
  std::vector<double> power_residual;
  /// Raw balance terms of dg runs, one per step.
  std::vector<DgStep> steps;

  /// Header "t,z_1..z_n,u_1..u_m,y_1..y_m,H,power_residual", 17 significant digits.
  void write_csv(std::ostream& os) const;
};

/// Optional per-node recorders for midpoint simulations.
struct MidpointRecorder {
  std::function<Vec(double t, const Vec& x)> input;
  std::function<Vec(const Vec& x)> output;
  std::function<double(const Vec& x)> storage;
};

/// Integrates x' = rhs(x, u) on `grid` with u_bar_i = (u(t_i) + u(t_{i+1}))/2.
/// `input` may be empty for autonomous systems. Step failures are rethrown
/// with the step index; `partial` then receives the nodes computed so far.
Trajectory simulate_midpoint(const InputRhs& rhs, const TimeGrid& grid, const Vec& x0,
                             const InputSignal& input, const MidpointRecorder& rec = {},
                             Trajectory* partial = nullptr);

/// Integrates `sys` with dg_step and fills the relative power-balance residual
///   |storage_rate + dissipation - supply| / max_j |storage_rate_j|.
Trajectory simulate_dg(const DgSystem& sys, const TimeGrid& grid, const Vec& z0,
                       const InputSignal& input, int input_size, Trajectory* partial = nullptr);

/// Closed-loop run with the implicit midpoint rule. Records plant input,
/// plant output and `storage` (empty -> plant storage if available, else 0).
Trajectory simulate_closed_loop(const ClosedLoop& loop, const TimeGrid& grid, const Vec& x0,
                                const ScalarField& storage = {}, Trajectory* partial = nullptr);

}  // namespace pasctl
