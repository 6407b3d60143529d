// Command-line runner for the passive-controller experiments.

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pasctl/experiments.hpp"

int main(int argc, char** argv) {
  pasctl::ExperimentConfig cfg;

  CLI::App app{"Passive optimal-control experiments: value functions, closed loops, audits"};
  app.set_config("--config", "", "INI-style key = value file; keys are the long option names");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);

  std::vector<std::string> presets;
  int degree = 0;
  std::vector<double> domain;
  std::vector<double> z0;
  std::string value_function;
  std::string out = cfg.out.string();

  app.add_option("--preset", presets, "pendulum-paper, vdp-paper, lti-ph-counterexample")
      ->delimiter(',');
  app.add_option("--degree", degree, "Galerkin degree d (per-axis basis size)");
  app.add_option("--domain", domain, "x_lo,x_hi,y_lo,y_hi")->delimiter(',')->expected(4);
  app.add_option("--tol-abs", cfg.tol_abs, "policy-iteration absolute tolerance");
  app.add_option("--tol-rel", cfg.tol_rel, "policy-iteration relative tolerance");
  app.add_option("--max-iters", cfg.max_iters, "policy-iteration budget");
  app.add_option("--test-grid", cfg.test_grid_per_axis, "test samples per axis");
  app.add_option("--horizon", cfg.T, "final time T");
  app.add_option("--nodes", cfg.m, "time-grid nodes m");
  app.add_option("--controllers", cfg.controllers, "subset of none,passive,ekf")->delimiter(',');
  app.add_option("--z0", z0, "plant initial state z1,z2")->delimiter(',')->expected(2);
  app.add_option("--value-function", value_function, "value-function CSV to reuse");
  app.add_option("--out", out, "output directory");
  app.add_option("--seed", cfg.seed, "recorded in the manifest");
  app.add_flag("--check", cfg.check, "exit 4 when an acceptance check fails");

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"solve-hjb", "policy iteration for the value function"},
      {"simulate", "uncontrolled, passive and EKF closed loops"},
      {"convergence", "order study of the discrete-gradient scheme"},
      {"verify-passivity", "discrete-gradient run of the passive controller"},
      {"counterexample", "indefinite combined storage of the 2x2 pH example"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return pasctl::exit_config_error;
  }

  cfg.presets = presets;
  if (app.count("--degree")) cfg.degree = degree;
  if (!domain.empty()) cfg.domain = pasctl::Rectangle{domain[0], domain[1], domain[2], domain[3]};
  if (!z0.empty()) cfg.z0 = Eigen::Vector2d(z0[0], z0[1]);
  cfg.value_function = value_function;
  cfg.out = out;

  return pasctl::run_command(app.get_subcommands().front()->get_name(), cfg, std::cout);
}
