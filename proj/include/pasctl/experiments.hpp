#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pasctl/controllers.hpp"
#include "pasctl/diagnostics.hpp"
#include "pasctl/hjb.hpp"
#include "pasctl/integrators.hpp"

namespace pasctl {

/// Exit codes of the command runners.
enum ExitCode : int {
  exit_ok = 0,
  exit_config_error = 2,
  exit_numerical_failure = 3,
  exit_check_failed = 4,
};

struct ExperimentConfig {
  /// Plant presets to run; empty selects the command's default.
  std::vector<std::string> presets;
  /// Overrides of the per-preset Galerkin degree and domain.
  std::optional<int> degree;
  std::optional<Rectangle> domain;
  double tol_abs = 1e-14;
  double tol_rel = 1e-10;
  int max_iters = 30;
  int test_grid_per_axis = 100;
  /// Time horizon and number of grid nodes.
  double T = 10.0;
  int m = 500;
  /// Closed loops run by `simulate`: any of "none", "passive", "ekf".
  std::vector<std::string> controllers = {"none", "passive", "ekf"};
  /// Plant initial state override for `simulate`.
  std::optional<Vec> z0;
  /// Value-function CSV to load instead of running policy iteration.
  std::filesystem::path value_function;
  std::filesystem::path out = "pasctl-out";
  unsigned seed = 0;
  bool check = false;

  /// Throws ConfigError.
  void validate() const;
};

/// Galerkin degree and domain frozen for a preset.
struct PresetDefaults {
  int degree = 10;
  Rectangle domain;
};

/// Throws ConfigError for unknown presets.
PresetDefaults preset_defaults(const std::string& preset);

/// Policy-iteration settings for `preset` after applying overrides.
PolicyIterConfig hjb_config(const ExperimentConfig& cfg, const std::string& preset);

/// Loads cfg.value_function when set, else runs policy iteration.
ValueFunctionApprox obtain_value_function(const ExperimentConfig& cfg, const PlantPreset& preset,
                                          std::ostream* log = nullptr);

struct ClosedLoopRun {
  std::string controller;  // "none", "passive" or "ekf"
  Trajectory traj;
  /// ||z(T)|| of the plant.
  double final_plant_norm = 0.0;
  /// max_t of the controller-state norm (0 when uncontrolled).
  double max_controller_norm = 0.0;
};

/// Coupled runs from plant state z0 with zhat0 = 0, zbar0 = 0 and Pi0 = I.
/// On failure `partial` receives the nodes computed so far.
ClosedLoopRun run_closed_loop(const PlantPreset& preset, const ValueFunctionApprox& V,
                              const std::string& controller, const TimeGrid& grid, const Vec& z0,
                              Trajectory* partial = nullptr);

struct ConvergenceStudy {
  std::vector<double> dts;
  std::vector<double> errors;
  double order = 0.0;
  double dt_ref = 0.0;
  /// max node distance between midpoint runs at dt_ref and dt_ref / 2.
  double reference_self_error = 0.0;
};

/// dg scheme on the plant with u(t) = sin t at dt0 * {1, 2, 4, 8} against the
/// implicit midpoint rule at dt0 / 8; errors are max node distances on [0, T].
ConvergenceStudy convergence_study(const PlantModel& plant, const Vec& z0, double T,
                                   double dt0 = 1e-3);

/// Least-squares slope of log(error) against log(dt).
double fitted_order(const std::vector<double>& dts, const std::vector<double>& errors);

struct PassivityRun {
  Trajectory traj;
  double max_power_residual = 0.0;
  AuditReport monotonicity;
};

/// dg run of the passive controller with uhat = 0 from zhat0.
PassivityRun passivity_run(const PassiveController& controller, const TimeGrid& grid,
                           const Vec& zhat0, double monotonicity_tol = 1e-10,
                           Trajectory* partial = nullptr);

/// Command runners. Each writes its artifacts and a manifest below cfg.out,
/// reports to `log`, and maps failures to exit codes (writing error.json).
int cmd_solve_hjb(const ExperimentConfig& cfg, std::ostream& log);
int cmd_simulate(const ExperimentConfig& cfg, std::ostream& log);
int cmd_convergence(const ExperimentConfig& cfg, std::ostream& log);
int cmd_verify_passivity(const ExperimentConfig& cfg, std::ostream& log);
int cmd_counterexample(const ExperimentConfig& cfg, std::ostream& log);

/// Dispatches on "solve-hjb", "simulate", "convergence", "verify-passivity" or
/// "counterexample".
int run_command(const std::string& command, const ExperimentConfig& cfg, std::ostream& log);

/// Writes through a temporary sibling file and renames it into place.
void write_file_atomic(const std::filesystem::path& path,
                       const std::function<void(std::ostream&)>& writer);

}  // namespace pasctl
