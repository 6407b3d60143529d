#include "pasctl/experiments.hpp"

#include <Eigen/Core>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <algorithm>
#include <sstream>

#include "json.hpp"
#include "pasctl/errors.hpp"
#include "pasctl/smalllin.hpp"

namespace pasctl {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

const std::vector<std::string> kPaperPresets = {"pendulum-paper", "vdp-paper"};

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Collects artifacts, results and checks of one command invocation.
class Run {
 public:
  Run(std::string command, const ExperimentConfig& cfg, std::ostream& log)
      : command_(std::move(command)), cfg_(cfg), log_(log),
        start_(std::chrono::steady_clock::now()) {}

  const ExperimentConfig& cfg() const { return cfg_; }
  std::ostream& log() { return log_; }
  json& results() { return results_; }

  fs::path file(const std::string& sub, const std::string& name) {
    const fs::path dir = sub.empty() ? cfg_.out : cfg_.out / sub;
    fs::create_directories(dir);
    artifacts_.push_back(fs::relative(dir / name, cfg_.out).generic_string());
    return dir / name;
  }

  void check(std::string name, bool pass, std::string detail) {
    log_ << "check " << (pass ? "PASS " : "FAIL ") << name << ": " << detail << '\n';
    checks_.push_back({std::move(name), pass, std::move(detail)});
  }

  int finish() {
    bool all = true;
    json checks = json::array();
    for (const auto& c : checks_) {
      all = all && c.pass;
      checks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    }
    json manifest = {
        {"command", command_},
        {"config", config_json(cfg_)},
        {"versions",
         {{"pasctl", kVersion},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                        std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"compiler", __VERSION__}}},
        {"wall_time_s",
         std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count()},
        {"results", results_},
        {"checks", checks},
        {"artifacts", artifacts_},
    };
    fs::create_directories(cfg_.out);
    write_file_atomic(cfg_.out / ("manifest_" + command_ + ".json"),
                      [&](std::ostream& os) { os << manifest.dump(2) << '\n'; });
    if (cfg_.check && !all) return exit_check_failed;
    return exit_ok;
  }

  static json config_json(const ExperimentConfig& c) {
    json j = {{"presets", c.presets},
              {"tol_abs", c.tol_abs},
              {"tol_rel", c.tol_rel},
              {"max_iters", c.max_iters},
              {"test_grid_per_axis", c.test_grid_per_axis},
              {"T", c.T},
              {"m", c.m},
              {"controllers", c.controllers},
              {"value_function", c.value_function.string()},
              {"out", c.out.string()},
              {"seed", c.seed},
              {"check", c.check}};
    if (c.degree) j["degree"] = *c.degree;
    if (c.domain) j["domain"] = {c.domain->x_lo, c.domain->x_hi, c.domain->y_lo, c.domain->y_hi};
    if (c.z0) j["z0"] = std::vector<double>(c.z0->data(), c.z0->data() + c.z0->size());
    return j;
  }

 private:
  std::string command_;
  const ExperimentConfig& cfg_;
  std::ostream& log_;
  std::chrono::steady_clock::time_point start_;
  json results_ = json::object();
  std::vector<std::string> artifacts_;
  std::vector<Check> checks_;
};

std::vector<std::string> presets_or(const ExperimentConfig& cfg,
                                    const std::vector<std::string>& fallback) {
  return cfg.presets.empty() ? fallback : cfg.presets;
}

std::string sci(double v) {
  std::ostringstream os;
  os << std::scientific << std::setprecision(6) << v;
  return os.str();
}

void write_csv_file(const fs::path& path, const std::function<void(std::ostream&)>& writer) {
  write_file_atomic(path, writer);
}

double max_node_distance(const std::vector<Vec>& coarse, const std::vector<Vec>& fine,
                         std::size_t stride) {
  double err = 0.0;
  for (std::size_t i = 0; i < coarse.size(); ++i) {
    err = std::max(err, (coarse[i] - fine[i * stride]).norm());
  }
  return err;
}

int grid_nodes(double T, double dt) {
  const double steps = T / dt;
  const double rounded = std::round(steps);
  if (std::abs(steps - rounded) > 1e-9 * steps) {
    throw ConfigError("time step " + sci(dt) + " does not divide the horizon " + sci(T));
  }
  return static_cast<int>(rounded) + 1;
}

template <typename Body>
int guarded(const std::string& command, const ExperimentConfig& cfg, std::ostream& log,
            Body&& body) {
  auto fail = [&](int code, const std::string& type, const std::string& message) {
    log << "error (" << type << "): " << message << '\n';
    try {
      fs::create_directories(cfg.out);
      const json record = {{"command", command},
                           {"error_type", type},
                           {"message", message},
                           {"exit_code", code}};
      write_file_atomic(cfg.out / "error.json",
                        [&](std::ostream& os) { os << record.dump(2) << '\n'; });
    } catch (const std::exception&) {
    }
    return code;
  };
  try {
    cfg.validate();
    return body();
  } catch (const ConfigError& e) {
    return fail(exit_config_error, "ConfigError", e.what());
  } catch (const UnsupportedOperation& e) {
    return fail(exit_config_error, "UnsupportedOperation", e.what());
  } catch (const NonConvergence& e) {
    return fail(exit_numerical_failure, "NonConvergence", e.what());
  } catch (const NewtonDivergence& e) {
    return fail(exit_numerical_failure, "NewtonDivergence", e.what());
  } catch (const RangeError& e) {
    return fail(exit_numerical_failure, "RangeError", e.what());
  } catch (const Error& e) {
    return fail(exit_numerical_failure, "NumericalError", e.what());
  } catch (const fs::filesystem_error& e) {
    return fail(exit_config_error, "IOError", e.what());
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  for (const auto& p : presets) preset_defaults(p);
  if (degree && *degree < 2) throw ConfigError("degree must be at least 2");
  if (domain) domain->validate();
  if (!(tol_abs > 0.0) || !(tol_rel > 0.0)) throw ConfigError("tolerances must be positive");
  if (max_iters < 1) throw ConfigError("max_iters must be positive");
  if (test_grid_per_axis < 2) throw ConfigError("test_grid_per_axis must be at least 2");
  if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("T must be positive");
  if (m < 2) throw ConfigError("m must be at least 2 (time grid needs two nodes)");
  for (const auto& c : controllers) {
    if (c != "none" && c != "passive" && c != "ekf") {
      throw ConfigError("unknown controller '" + c + "' (expected none, passive or ekf)");
    }
  }
  if (z0 && z0->size() != 2) throw ConfigError("z0 must have two entries");
  if (!value_function.empty() && presets.size() > 1) {
    throw ConfigError("value_function can only be combined with a single preset");
  }
  if (out.empty()) throw ConfigError("output directory must not be empty");
}

PresetDefaults preset_defaults(const std::string& preset) {
  if (preset == "pendulum-paper") return {10, Rectangle{-2.0, 2.0, -2.0, 2.0}};
  if (preset == "vdp-paper") return {15, Rectangle{-1.8, 1.8, -1.8, 1.8}};
  if (preset == "lti-ph-counterexample") return {5, Rectangle{}};
  throw ConfigError("unknown plant preset '" + preset + "'");
}

PolicyIterConfig hjb_config(const ExperimentConfig& cfg, const std::string& preset) {
  const PresetDefaults d = preset_defaults(preset);
  PolicyIterConfig pc;
  pc.degree = cfg.degree.value_or(d.degree);
  pc.domain = cfg.domain.value_or(d.domain);
  pc.tol_abs = cfg.tol_abs;
  pc.tol_rel = cfg.tol_rel;
  pc.max_iters = cfg.max_iters;
  pc.test_grid_per_axis = cfg.test_grid_per_axis;
  pc.validate();
  return pc;
}

ValueFunctionApprox obtain_value_function(const ExperimentConfig& cfg, const PlantPreset& preset,
                                          std::ostream* log) {
  if (!cfg.value_function.empty()) return ValueFunctionApprox::load(cfg.value_function).anchored();
  return policy_iteration(preset.plant, hjb_config(cfg, preset.plant.name), log).V;
}

ClosedLoopRun run_closed_loop(const PlantPreset& preset, const ValueFunctionApprox& V,
                              const std::string& controller, const TimeGrid& grid,
                              const Vec& z0, Trajectory* partial) {
  const PlantModel& plant = preset.plant;
  const int n = plant.n;
  const Vec zeros = Vec::Zero(n);
  const Mat eye = Mat::Identity(n, n);
  ClosedLoopRun run;
  run.controller = controller;
  if (controller == "none") {
    const ClosedLoop loop(plant);
    run.traj = simulate_closed_loop(loop, grid, loop.initial_state(z0, zeros, eye), {}, partial);
  } else if (controller == "passive") {
    const ClosedLoop loop(plant, PassiveController(plant, V));
    run.traj = simulate_closed_loop(loop, grid, loop.initial_state(z0, zeros, eye), {}, partial);
  } else if (controller == "ekf") {
    const ClosedLoop loop(plant, EkfController(plant, V));
    run.traj = simulate_closed_loop(loop, grid, loop.initial_state(z0, zeros, eye), {}, partial);
  } else {
    throw ConfigError("unknown controller '" + controller + "'");
  }
  run.final_plant_norm = run.traj.states.back().head(n).norm();
  if (controller != "none") {
    for (const auto& x : run.traj.states) {
      run.max_controller_norm = std::max(run.max_controller_norm, x.segment(n, n).norm());
    }
  }
  return run;
}

double fitted_order(const std::vector<double>& dts, const std::vector<double>& errors) {
  if (dts.size() != errors.size() || dts.size() < 2) {
    throw ConfigError("fitted_order: need at least two (dt, error) pairs");
  }
  const auto n = static_cast<Eigen::Index>(dts.size());
  Mat X(n, 2);
  Vec y(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto i = static_cast<std::size_t>(k);
    if (!(dts[i] > 0.0) || !(errors[i] > 0.0)) {
      throw RangeError("fitted_order: step sizes and errors must be positive");
    }
    X(k, 0) = 1.0;
    X(k, 1) = std::log(dts[i]);
    y(k) = std::log(errors[i]);
  }
  return X.colPivHouseholderQr().solve(y)(1);
}

ConvergenceStudy convergence_study(const PlantModel& plant, const Vec& z0, double T,
                                   double dt0) {
  if (!plant.storage) {
    throw UnsupportedOperation("convergence study needs a plant with storage; '" + plant.name +
                               "' has none");
  }
  const InputSignal input = [](double t) { return Vec::Constant(1, std::sin(t)); };
  if (plant.m != 1) throw ConfigError("convergence study drives a single-input plant");
  const InputRhs rhs = [&plant](const Vec& x, const Vec& u) -> Vec {
    return plant.f(x) + plant.B(x) * u;
  };

  ConvergenceStudy study;
  study.dt_ref = dt0 / 8.0;
  const Trajectory ref =
      simulate_midpoint(rhs, TimeGrid::uniform(T, grid_nodes(T, study.dt_ref)), z0, input);
  const Trajectory ref_half =
      simulate_midpoint(rhs, TimeGrid::uniform(T, grid_nodes(T, study.dt_ref / 2)), z0, input);
  study.reference_self_error = max_node_distance(ref.states, ref_half.states, 2);

  const double inf = std::numeric_limits<double>::infinity();
  const Vec lo = Eigen::Vector2d(-std::numbers::pi / 2, -inf);
  const Vec hi = Eigen::Vector2d(std::numbers::pi / 2, inf);
  const DgSystem sys = plant_dg_system(plant, std::pair{lo, hi});
  for (int k : {1, 2, 4, 8}) {
    const double dt = k * dt0;
    const Trajectory traj = simulate_dg(sys, TimeGrid::uniform(T, grid_nodes(T, dt)), z0, input, 1);
    study.dts.push_back(dt);
    study.errors.push_back(max_node_distance(traj.states, ref.states, 8 * k));
  }
  study.order = fitted_order(study.dts, study.errors);
  return study;
}

PassivityRun passivity_run(const PassiveController& controller, const TimeGrid& grid,
                           const Vec& zhat0, double monotonicity_tol, Trajectory* partial) {
  PassivityRun run;
  run.traj = simulate_dg(controller_dg_system(controller), grid, zhat0, InputSignal{},
                         controller.plant().m, partial);
  for (double r : run.traj.power_residual) run.max_power_residual = std::max(run.max_power_residual, r);
  run.monotonicity = storage_monotonicity(run.traj, monotonicity_tol);
  return run;
}

void write_file_atomic(const fs::path& path, const std::function<void(std::ostream&)>& writer) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw ConfigError("cannot write '" + tmp.string() + "'");
    writer(os);
    os.flush();
    if (!os) throw ConfigError("failed while writing '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

int cmd_solve_hjb(const ExperimentConfig& cfg, std::ostream& log) {
  return guarded("solve-hjb", cfg, log, [&] {
    Run run("solve-hjb", cfg, log);
    for (const auto& name : presets_or(cfg, kPaperPresets)) {
      const PlantPreset preset = plant_preset(name);
      const PolicyIterConfig pc = hjb_config(cfg, name);
      log << "== " << name << " (d=" << pc.degree << ", domain [" << pc.domain.x_lo << ','
          << pc.domain.x_hi << "]x[" << pc.domain.y_lo << ',' << pc.domain.y_hi << "])\n";
      const auto t0 = std::chrono::steady_clock::now();
      std::ostringstream iter_log;
      const PolicyIterReport rep = policy_iteration(preset.plant, pc, &iter_log);
      const double seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      log << iter_log.str();

      write_csv_file(run.file(name, "value_function.csv"),
                     [&](std::ostream& os) { rep.V.write_csv(os); });
      write_csv_file(run.file(name, "policy_iteration.csv"), [&](std::ostream& os) {
        os << "iteration,delta_abs,delta_rel,hjb_rms\n" << std::setprecision(17);
        for (int k = 0; k < rep.iterations; ++k) {
          const auto i = static_cast<std::size_t>(k);
          os << k + 1 << ',' << rep.delta_abs_history[i] << ',' << rep.delta_rel_history[i] << ','
             << rep.hjb_residual_history[i] << '\n';
        }
      });
      const auto grid = tensor_grid(pc.domain, pc.test_grid_per_axis);
      const AuditReport hjb = hjb_residual_map(rep.V, preset.plant, grid,
                                               std::numeric_limits<double>::infinity());
      write_csv_file(run.file(name, "hjb_residual.csv"),
                     [&](std::ostream& os) { hjb.write_csv(os); });
      write_csv_file(run.file(name, "value_function_grid.csv"), [&](std::ostream& os) {
        os << "z_1,z_2,V\n" << std::setprecision(17);
        for (const auto& z : grid) os << z(0) << ',' << z(1) << ',' << rep.V.value(z) << '\n';
      });
      hjb.write_summary(log);

      const double quad_res =
          quadratic_fit_residual([&](const Vec& z) { return rep.V.value(z); }, grid);
      run.results()[name] = {{"iterations", rep.iterations},
                             {"delta_abs", rep.delta_abs_history.back()},
                             {"delta_rel", rep.delta_rel_history.back()},
                             {"hjb_residual_max", hjb.max_abs},
                             {"hjb_residual_rms", hjb.rms},
                             {"quadratic_fit_residual", quad_res},
                             {"seconds", seconds}};
      run.check(name + ": policy iteration converged in fewer than 10 iterations",
                rep.iterations < 10, std::to_string(rep.iterations) + " iterations");
      if (name == "vdp-paper") {
        run.check(name + ": value function is not quadratic", quad_res > 0.05,
                  "relative L2 residual of the best quadratic fit " + sci(quad_res));
      }
    }
    return run.finish();
  });
}

int cmd_simulate(const ExperimentConfig& cfg, std::ostream& log) {
  return guarded("simulate", cfg, log, [&] {
    Run run("simulate", cfg, log);
    const TimeGrid grid = TimeGrid::uniform(cfg.T, cfg.m);
    for (const auto& name : presets_or(cfg, kPaperPresets)) {
      const PlantPreset preset = plant_preset(name);
      const Vec z0 = cfg.z0.value_or(preset.z0);
      log << "== " << name << '\n';
      const ValueFunctionApprox V = obtain_value_function(cfg, preset);
      std::map<std::string, ClosedLoopRun> runs;
      json res = json::object();
      for (const auto& c : cfg.controllers) {
        const fs::path path = run.file(name, "trajectory_" + c + ".csv");
        ClosedLoopRun r;
        Trajectory partial;
        try {
          r = run_closed_loop(preset, V, c, grid, z0, &partial);
        } catch (const Error&) {
          write_csv_file(path, [&](std::ostream& os) { partial.write_csv(os); });
          throw;
        }
        write_csv_file(path, [&](std::ostream& os) { r.traj.write_csv(os); });
        log << "  " << std::setw(8) << c << "  |z(T)| = " << sci(r.final_plant_norm)
            << "  max |controller state| = " << sci(r.max_controller_norm) << '\n';
        res[c] = {{"final_plant_norm", r.final_plant_norm},
                  {"max_controller_norm", r.max_controller_norm}};
        runs.emplace(c, std::move(r));
      }
      if (runs.count("none")) {
        const double base = runs.at("none").final_plant_norm;
        for (const char* c : {"passive", "ekf"}) {
          if (!runs.count(c)) continue;
          const double v = runs.at(c).final_plant_norm;
          res[c]["ratio_to_uncontrolled"] = base > 0.0 ? v / base : 0.0;
          run.check(name + ": " + c + " |z(T)| below uncontrolled", v < base || (v == 0.0 && base == 0.0),
                    sci(v) + " vs " + sci(base));
        }
      }
      if (runs.count("passive") && runs.count("ekf")) {
        const double p = runs.at("passive").max_controller_norm;
        const double e = runs.at("ekf").max_controller_norm;
        run.check(name + ": EKF controller state larger than passive", e > p,
                  sci(e) + " vs " + sci(p));
      }
      run.results()[name] = res;
    }
    return run.finish();
  });
}

int cmd_convergence(const ExperimentConfig& cfg, std::ostream& log) {
  return guarded("convergence", cfg, log, [&] {
    Run run("convergence", cfg, log);
    const auto presets = presets_or(cfg, {"pendulum-paper"});
    if (presets.size() != 1) throw ConfigError("convergence runs on exactly one preset");
    const PlantPreset preset = plant_preset(presets.front());
    const ConvergenceStudy s = convergence_study(preset.plant, cfg.z0.value_or(preset.z0), cfg.T);
    write_csv_file(run.file("", "convergence.csv"), [&](std::ostream& os) {
      os << "dt,error\n" << std::setprecision(17);
      for (std::size_t i = 0; i < s.dts.size(); ++i) os << s.dts[i] << ',' << s.errors[i] << '\n';
    });
    log << "       dt        error\n";
    for (std::size_t i = 0; i < s.dts.size(); ++i) {
      log << "  " << sci(s.dts[i]) << "  " << sci(s.errors[i]) << '\n';
    }
    log << "fitted order " << std::fixed << std::setprecision(4) << s.order << std::defaultfloat
        << "\nreference self-check " << sci(s.reference_self_error) << '\n';
    run.results() = {{"preset", preset.plant.name},
                     {"dt", s.dts},
                     {"error", s.errors},
                     {"order", s.order},
                     {"dt_ref", s.dt_ref},
                     {"reference_self_error", s.reference_self_error}};
    run.check("fitted order in [1.8, 2.2]", s.order >= 1.8 && s.order <= 2.2, sci(s.order));
    bool decreasing = true;
    for (std::size_t i = 1; i < s.errors.size(); ++i) decreasing = decreasing && s.errors[i - 1] < s.errors[i];
    run.check("error decreases with the step size", decreasing, "over dt = 1e-3 .. 8e-3");
    const double min_err = *std::min_element(s.errors.begin(), s.errors.end());
    run.check("reference resolves the smallest error", s.reference_self_error < min_err / 10.0,
              sci(s.reference_self_error) + " vs " + sci(min_err / 10.0));
    return run.finish();
  });
}

int cmd_verify_passivity(const ExperimentConfig& cfg, std::ostream& log) {
  return guarded("verify-passivity", cfg, log, [&] {
    Run run("verify-passivity", cfg, log);
    const TimeGrid grid = TimeGrid::uniform(cfg.T, cfg.m);
    const Vec zhat0 = Eigen::Vector2d(1.0, 1.0);
    for (const auto& name : presets_or(cfg, kPaperPresets)) {
      const PlantPreset preset = plant_preset(name);
      log << "== " << name << '\n';
      const PassiveController controller(preset.plant, obtain_value_function(cfg, preset));
      const fs::path path = run.file(name, "passivity.csv");
      PassivityRun pr;
      Trajectory partial;
      try {
        pr = passivity_run(controller, grid, zhat0, 1e-10, &partial);
      } catch (const Error&) {
        write_csv_file(path, [&](std::ostream& os) { partial.write_csv(os); });
        throw;
      }
      write_csv_file(path, [&](std::ostream& os) { pr.traj.write_csv(os); });
      pr.monotonicity.write_summary(log);
      log << "  max relative power-balance residual " << sci(pr.max_power_residual) << '\n';
      run.results()[name] = {{"max_power_residual", pr.max_power_residual},
                             {"max_storage_increase", pr.monotonicity.max_abs},
                             {"H_initial", pr.traj.storage.front()},
                             {"H_final", pr.traj.storage.back()}};
      run.check(name + ": power balance below 1e-12", pr.max_power_residual < 1e-12,
                sci(pr.max_power_residual));
      run.check(name + ": controller storage nonincreasing", pr.monotonicity.pass,
                "largest increase " + sci(pr.monotonicity.max_abs));
    }
    return run.finish();
  });
}

int cmd_counterexample(const ExperimentConfig& cfg, std::ostream& log) {
  return guarded("counterexample", cfg, log, [&] {
    Run run("counterexample", cfg, log);
    const LtiPhPlant plant = counterexample_lti_plant();
    const CounterexampleReport r = counterexample_check(plant);
    const Condition10Report c10 = check_condition_10(plant);
    const PhRealization real = ph_realizability_lti(plant);

    const double s2 = std::sqrt(2.0);
    const Eigen::Vector2d expected_eigs(-s2 + 2.0 * std::sqrt(2.0 - s2),
                                        -s2 - 2.0 * std::sqrt(2.0 - s2));
    const Eigen::Matrix2d expected_P = Eigen::Vector2d(s2 - 1.0, 1.0).asDiagonal();
    const double eig_err = (r.eigenvalues - expected_eigs).cwiseAbs().maxCoeff();
    const double P_err = (r.P_c - expected_P).cwiseAbs().maxCoeff();

    std::ostringstream report;
    report << std::setprecision(17) << "P_c =\n" << r.P_c << "\neigenvalues of A^T (P_c + Q) + (P_c + Q) A:\n"
           << r.eigenvalues.transpose() << "\nverdict: "
           << (r.indefinite ? "indefinite (combined storage fails)" : "definite") << '\n'
           << "R + B B^T eigenvalues: " << c10.eigenvalues.transpose() << '\n'
           << "controller R_hat min eigenvalue: " << real.min_eig_R_hat << '\n';
    log << report.str();
    write_file_atomic(run.file("", "counterexample.txt"),
                      [&](std::ostream& os) { os << report.str(); });
    run.results() = {{"P_c", {{r.P_c(0, 0), r.P_c(0, 1)}, {r.P_c(1, 0), r.P_c(1, 1)}}},
                     {"eigenvalues", {r.eigenvalues(0), r.eigenvalues(1)}},
                     {"condition_10", c10.holds},
                     {"R_hat_min_eigenvalue", real.min_eig_R_hat}};
    run.check("eigenvalues match -sqrt2 +- 2 sqrt(2 - sqrt2)", eig_err <= 1e-10,
              "max deviation " + sci(eig_err));
    run.check("P_c = diag(sqrt2 - 1, 1)", P_err <= 1e-10, "max deviation " + sci(P_err));
    run.check("one positive and one negative eigenvalue",
              r.eigenvalues(0) > 0.0 && r.eigenvalues(1) < 0.0,
              sci(r.eigenvalues(0)) + ", " + sci(r.eigenvalues(1)));
    return run.finish();
  });
}

int run_command(const std::string& command, const ExperimentConfig& cfg, std::ostream& log) {
  if (command == "solve-hjb") return cmd_solve_hjb(cfg, log);
  if (command == "simulate") return cmd_simulate(cfg, log);
  if (command == "convergence") return cmd_convergence(cfg, log);
  if (command == "verify-passivity") return cmd_verify_passivity(cfg, log);
  if (command == "counterexample") return cmd_counterexample(cfg, log);
  log << "error (ConfigError): unknown command '" << command << "'\n";
  return exit_config_error;
}

}  // namespace pasctl
