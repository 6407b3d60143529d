#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "pasctl/diagnostics.hpp"
#include "pasctl/errors.hpp"
#include "pasctl/experiments.hpp"
#include "pasctl/hjb.hpp"
#include "pasctl/smalllin.hpp"

using namespace pasctl;

namespace {

PolicyIterConfig preset_config(const std::string& name) {
  const PresetDefaults d = preset_defaults(name);
  PolicyIterConfig cfg;
  cfg.degree = d.degree;
  cfg.domain = d.domain;
  return cfg;
}

/// max ||grad V(z) - P z|| / max ||P z|| over the test grid.
double lq_gap(const ValueFunctionApprox& V, const Mat& P, const PolicyIterConfig& cfg) {
  double num = 0.0, den = 0.0;
  for (const auto& z : tensor_grid(cfg.domain, cfg.test_grid_per_axis)) {
    num = std::max(num, (V.gradient(z) - P * z).norm());
    den = std::max(den, (P * z).norm());
  }
  return num / den;
}

}  // namespace

TEST(PolicyIterConfig, Validation) {
  PolicyIterConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.degree = 1;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = PolicyIterConfig{};
  cfg.tol_abs = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = PolicyIterConfig{};
  cfg.tol_rel = -1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = PolicyIterConfig{};
  cfg.domain = Rectangle{1.0, -1.0, -1.0, 1.0};
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(PolicyIteration, RejectsDegreeBelowTwo) {
  PolicyIterConfig cfg;
  cfg.degree = 0;
  EXPECT_THROW(policy_iteration(plant_preset("pendulum-paper").plant, cfg), ConfigError);
}

TEST(StoppingMetrics, IdenticalPolicies) {
  const Policy u = [](const Vec& z) -> Vec { return Vec::Constant(1, z(0) - z(1)); };
  const StoppingMetrics m = stopping_metrics(u, u, tensor_grid(Rectangle{}, 5));
  EXPECT_EQ(m.delta_abs, 0.0);
  EXPECT_EQ(m.delta_rel, 0.0);
}

TEST(StoppingMetrics, ConstantPolicies) {
  const Policy u_old = [](const Vec&) -> Vec { return Vec::Constant(1, 1.0); };
  const Policy u_new = [](const Vec&) -> Vec { return Vec::Constant(1, 1.5); };
  const StoppingMetrics m = stopping_metrics(u_new, u_old, tensor_grid(Rectangle{}, 4));
  EXPECT_DOUBLE_EQ(m.delta_abs, 0.5);
  EXPECT_DOUBLE_EQ(m.delta_rel, 0.5);
}

TEST(StoppingMetrics, LinearPoliciesOnTwoPoints) {
  const Policy u_old = [](const Vec& z) -> Vec { return Vec::Constant(1, z(0)); };
  const Policy u_new = [](const Vec& z) -> Vec { return Vec::Constant(1, 2.0 * z(0)); };
  const std::vector<Vec> grid = {Eigen::Vector2d(1.0, 0.0), Eigen::Vector2d(2.0, 0.0)};
  const StoppingMetrics m = stopping_metrics(u_new, u_old, grid);
  EXPECT_DOUBLE_EQ(m.delta_abs, 2.0);
  EXPECT_DOUBLE_EQ(m.delta_rel, 1.0);
}

TEST(StoppingMetrics, ZeroOldPolicyGivesInfiniteRelativeChange) {
  const Policy zero = [](const Vec&) -> Vec { return Vec::Zero(1); };
  const Policy one = [](const Vec&) -> Vec { return Vec::Ones(1); };
  const StoppingMetrics m = stopping_metrics(one, zero, tensor_grid(Rectangle{}, 3));
  EXPECT_DOUBLE_EQ(m.delta_abs, 1.0);
  EXPECT_EQ(m.delta_rel, std::numeric_limits<double>::infinity());
}

TEST(TensorGrid, IncludesCorners) {
  const auto g = tensor_grid(Rectangle{-1.0, 2.0, 0.0, 4.0}, 100);
  ASSERT_EQ(g.size(), 10000u);
  EXPECT_EQ(g.front(), Vec(Eigen::Vector2d(-1.0, 0.0)));
  EXPECT_EQ(g.back(), Vec(Eigen::Vector2d(2.0, 4.0)));
}

TEST(AssembleSystem, TrivialPlantIsSingular) {
  const PlantModel p = make_plant(
      "trivial", 2, 1, [](const Vec&) -> Vec { return Vec::Zero(2); },
      [](const Vec&) -> Mat { return Mat::Zero(2, 1); }, [](const Vec&) -> Vec { return Vec::Zero(1); });
  const LegendreBasis basis(4, Rectangle{});
  const Policy zero = [](const Vec&) -> Vec { return Vec::Zero(1); };
  const GalerkinSystem sys = assemble_system(p, zero, basis, gauss_rule(10, basis.domain));
  EXPECT_EQ(sys.M.norm(), 0.0);
  EXPECT_EQ(sys.rhs.norm(), 0.0);
  EXPECT_THROW(solve_galerkin(sys, basis), SingularGalerkinSystem);
}

TEST(AssembleSystem, PendulumParityDecoupling) {
  const auto plant = plant_preset("pendulum-paper").plant;
  const int d = 6;
  const LegendreBasis basis(d, Rectangle{-2.0, 2.0, -2.0, 2.0});
  const Policy u = [](const Vec& z) -> Vec { return Vec::Constant(1, -0.8 * z(1) + 0.1 * z(0)); };
  const GalerkinSystem sys = assemble_system(plant, u, basis, gauss_rule(2 * (d + 1), basis.domain));
  ASSERT_EQ(sys.M.rows(), d * d - 1);
  double mixed = 0.0, same = 0.0;
  for (int r = 0; r < d; ++r)
    for (int s = 0; s < d; ++s)
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          if ((r == 0 && s == 0) || (i == 0 && j == 0)) continue;
          const double e = std::abs(sys.M(active_index(r, s, d), active_index(i, j, d)));
          if ((r + s) % 2 != (i + j) % 2) {
            mixed = std::max(mixed, e);
          } else {
            same = std::max(same, e);
          }
        }
  EXPECT_LT(mixed, 1e-12);
  EXPECT_GT(same, 1e-3);
  // Odd modes carry no cost: the cost integrand is even.
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      if ((i + j) % 2 == 1) EXPECT_LT(std::abs(sys.rhs(active_index(i, j, d))), 1e-12);
}

TEST(PolicyIteration, LqOracleOnCounterexamplePlant) {
  const LtiPhPlant lti = counterexample_lti_plant();
  PolicyIterConfig cfg;
  cfg.degree = 5;
  const PolicyIterReport rep = policy_iteration(lti.to_plant(), cfg);
  const CareSolution care = solve_care(lti.A(), lti.Bc(), lti.C());
  EXPECT_LE(lq_gap(rep.V, care.P, cfg), 1e-6);
  EXPECT_LT(rep.iterations, 10);
  EXPECT_LT(rep.final_hjb_residual, 1e-8);
}

TEST(PolicyIteration, LqOracleOnRandomPhPlants) {
  for (unsigned seed = 1; seed <= 5; ++seed) {
    const LtiPhPlant lti = random_lti_ph_plant(2, 1, seed);
    for (int d : {3, 4, 6}) {
      PolicyIterConfig cfg;
      cfg.degree = d;
      const PolicyIterReport rep = policy_iteration(lti.to_plant(), cfg);
      const CareSolution care = solve_care(lti.A(), lti.Bc(), lti.C());
      EXPECT_LE(lq_gap(rep.V, care.P, cfg), 1e-6) << "seed " << seed << " d " << d;
    }
  }
}

TEST(PolicyIteration, PendulumOnDefaultDomainConvergesQuickly) {
  PolicyIterConfig cfg;
  cfg.degree = 10;
  cfg.domain = Rectangle{-3.0, 3.0, -3.0, 3.0};
  try {
    const PolicyIterReport rep = policy_iteration(plant_preset("pendulum-paper").plant, cfg);
    EXPECT_LT(rep.iterations, 10);
  } catch (const NonConvergence& e) {
    ADD_FAILURE() << e.what();
  }
}

TEST(PolicyIteration, PresetsConvergeWithinTenIterations) {
  for (const char* name : {"pendulum-paper", "vdp-paper"}) {
    const PolicyIterConfig cfg = preset_config(name);
    const auto t0 = std::chrono::steady_clock::now();
    const PolicyIterReport rep = policy_iteration(plant_preset(name).plant, cfg);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    EXPECT_LT(rep.iterations, 10) << name;
    EXPECT_LT(seconds, 60.0) << name;
    ASSERT_EQ(rep.delta_abs_history.size(), static_cast<std::size_t>(rep.iterations));
    ASSERT_EQ(rep.hjb_residual_history.size(), static_cast<std::size_t>(rep.iterations));
    const bool stopped =
        rep.delta_abs_history.back() <= cfg.tol_abs || rep.delta_rel_history.back() <= cfg.tol_rel;
    EXPECT_TRUE(stopped) << name;
    if (rep.iterations > 1) {
      EXPECT_LT(rep.final_hjb_residual, rep.hjb_residual_history.front()) << name;
    }
    EXPECT_TRUE(rep.V.is_anchored());
    EXPECT_EQ(rep.V.gradient(Eigen::Vector2d::Zero()), Eigen::Vector2d::Zero());
  }
}

TEST(PolicyIteration, ReturnedValueFunctionSolvesItsOwnEvaluationSystem) {
  for (const char* name : {"pendulum-paper", "vdp-paper"}) {
    const PolicyIterConfig cfg = preset_config(name);
    const auto plant = plant_preset(name).plant;
    const PolicyIterReport rep = policy_iteration(plant, cfg);
    const LegendreBasis basis(cfg.degree, cfg.domain);
    const GalerkinSystem sys = assemble_system(plant, greedy_policy(plant, rep.V), basis,
                                               gauss_rule(2 * (cfg.degree + 1), cfg.domain));
    const double defect = (sys.M * rep.V.active_coefficients() - sys.rhs).norm();
    EXPECT_LE(defect, 1e-10 * (1 + sys.rhs.norm())) << name;
  }
}

TEST(PolicyIteration, LogsOneLinePerIteration) {
  PolicyIterConfig cfg;
  cfg.degree = 4;
  std::ostringstream log;
  const PolicyIterReport rep = policy_iteration(counterexample_lti_plant().to_plant(), cfg, &log);
  int lines = 0;
  for (char c : log.str()) lines += c == '\n';
  EXPECT_EQ(lines, rep.iterations);
}

TEST(PolicyIteration, BudgetExhaustionCarriesHistory) {
  PolicyIterConfig cfg = preset_config("vdp-paper");
  cfg.max_iters = 2;
  try {
    policy_iteration(plant_preset("vdp-paper").plant, cfg);
    FAIL() << "expected NonConvergence";
  } catch (const NonConvergence& e) {
    EXPECT_EQ(e.history().size(), 2u);
  }
}

TEST(HjbResidual, ZeroValueFunctionLeavesOutputCost) {
  const auto plant = plant_preset("pendulum-paper").plant;
  const ValueFunctionApprox V(LegendreBasis(3, Rectangle{}), Eigen::MatrixXd::Zero(3, 3));
  const Vec z = Eigen::Vector2d(0.4, -1.3);
  EXPECT_NEAR(hjb_residual_at(plant, V, z), 0.5 * plant.h(z).squaredNorm(), 1e-15);
}

TEST(HjbResidual, ExactQuadraticOnLtiPlantVanishes) {
  const LtiPhPlant lti = counterexample_lti_plant();
  const Mat P = solve_care(lti.A(), lti.Bc(), lti.C()).P;
  const LegendreBasis basis(3, Rectangle{});
  const ValueFunctionApprox V = project(
      basis, [&](const Vec& z) { return 0.5 * z.dot(P * z); }, gauss_rule(8, basis.domain));
  for (const auto& z : tensor_grid(basis.domain, 20)) {
    EXPECT_LT(std::abs(hjb_residual_at(lti.to_plant(), V, z)), 1e-9);
  }
}
