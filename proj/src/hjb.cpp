#include "pasctl/hjb.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "pasctl/errors.hpp"
#include "pasctl/smalllin.hpp"

namespace pasctl {

void PolicyIterConfig::validate() const {
  if (degree < 2) throw ConfigError("policy iteration: degree must be at least 2");
  domain.validate();
  if (!(tol_abs > 0.0) || !(tol_rel > 0.0)) {
    throw ConfigError("policy iteration: tolerances must be positive");
  }
  if (max_iters < 1) throw ConfigError("policy iteration: max_iters must be positive");
  if (test_grid_per_axis < 2) throw ConfigError("policy iteration: test grid needs >= 2 samples");
}

GalerkinSystem assemble_system(const PlantModel& plant, const Policy& policy,
                               const LegendreBasis& basis, const QuadratureRule& quad) {
  if (plant.n != 2) throw ConfigError("assemble_system: Galerkin scheme is two-dimensional");
  const int d = basis.degree;
  const int N = basis.active_size();
  const auto nq = static_cast<Eigen::Index>(quad.nodes.size());
  const auto& dom = basis.domain;

  Mat psi(nq, N);
  Mat transport(nq, N);
  Vec cost(nq);
  Vec w(nq);
  for (Eigen::Index q = 0; q < nq; ++q) {
    const Vec z = quad.nodes[static_cast<std::size_t>(q)];
    const Vec u = policy(z);
    const Vec drift = plant.f(z) + plant.B(z) * u;
    const Vec y = plant.h(z);
    const auto tx = legendre_table(d, z(0), dom.x_lo, dom.x_hi);
    const auto ty = legendre_table(d, z(1), dom.y_lo, dom.y_hi);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        if (i == 0 && j == 0) continue;
        const int k = active_index(i, j, d);
        psi(q, k) = tx.value(i) * ty.value(j);
        transport(q, k) =
            tx.d1(i) * ty.value(j) * drift(0) + tx.value(i) * ty.d1(j) * drift(1);
      }
    }
    cost(q) = y.squaredNorm() + u.squaredNorm();
    w(q) = quad.weights[static_cast<std::size_t>(q)];
  }

  GalerkinSystem sys;
  sys.M = psi.transpose() * (w.asDiagonal() * transport);
  sys.rhs = -0.5 * (psi.transpose() * w.cwiseProduct(cost));
  return sys;
}

ValueFunctionApprox solve_galerkin(const GalerkinSystem& sys, const LegendreBasis& basis) {
  try {
    return ValueFunctionApprox::from_active(basis, solve_linear(sys.M, sys.rhs));
  } catch (const SingularMatrix&) {
    throw SingularGalerkinSystem(
        "policy evaluation system is singular (degenerate policy/domain pairing)");
  }
}

Policy greedy_policy(const PlantModel& plant, const ValueFunctionApprox& V) {
  return [B = plant.B, V](const Vec& z) -> Vec {
    return -B(z).transpose() * Vec(V.gradient(z.head<2>()));
  };
}

std::vector<Vec> tensor_grid(const Rectangle& domain, int per_axis) {
  std::vector<Vec> grid;
  grid.reserve(static_cast<std::size_t>(per_axis * per_axis));
  const auto xs = Vec::LinSpaced(per_axis, domain.x_lo, domain.x_hi);
  const auto ys = Vec::LinSpaced(per_axis, domain.y_lo, domain.y_hi);
  for (int i = 0; i < per_axis; ++i)
    for (int j = 0; j < per_axis; ++j) grid.emplace_back(Eigen::Vector2d(xs(i), ys(j)));
  return grid;
}

namespace {

StoppingMetrics metrics_from_samples(const std::vector<Vec>& u_new,
                                     const std::vector<Vec>& u_old) {
  double diff = 0.0;
  double size = 0.0;
  for (std::size_t k = 0; k < u_new.size(); ++k) {
    diff = std::max(diff, (u_new[k] - u_old[k]).norm());
    size = std::max(size, u_old[k].norm());
  }
  StoppingMetrics m;
  m.delta_abs = diff;
  m.delta_rel = size > 0.0 ? diff / size : std::numeric_limits<double>::infinity();
  return m;
}

std::vector<Vec> sample(const Policy& u, const std::vector<Vec>& grid) {
  std::vector<Vec> out;
  out.reserve(grid.size());
  for (const auto& z : grid) out.push_back(u(z));
  return out;
}

}  // namespace

StoppingMetrics stopping_metrics(const Policy& u_new, const Policy& u_old,
                                 const std::vector<Vec>& grid) {
  if (grid.empty()) throw ConfigError("stopping_metrics: empty grid");
  return metrics_from_samples(sample(u_new, grid), sample(u_old, grid));
}

double hjb_residual_at(const PlantModel& plant, const ValueFunctionApprox& V, const Vec& z) {
  const Vec eta = V.gradient(z.head<2>());
  const Vec bt_eta = plant.B(z).transpose() * eta;
  return eta.dot(plant.f(z)) - 0.5 * bt_eta.squaredNorm() + 0.5 * plant.h(z).squaredNorm();
}

PolicyIterReport policy_iteration(const PlantModel& plant, const PolicyIterConfig& cfg,
                                  std::ostream* log) {
  cfg.validate();
  if (plant.n != 2) throw ConfigError("policy_iteration: plant must be two-dimensional");

  const LegendreBasis basis(cfg.degree, cfg.domain);
  const QuadratureRule quad = gauss_rule(2 * (cfg.degree + 1), cfg.domain);
  const std::vector<Vec> grid = tensor_grid(cfg.domain, cfg.test_grid_per_axis);

  const Linearization lin = linearize(plant);
  const CareSolution care = solve_care(lin.A, lin.B0, lin.C);
  Policy u_old = [K = Mat(lin.B0.transpose() * care.P)](const Vec& z) -> Vec {
    return -K * z;
  };
  std::vector<Vec> u_old_samples = sample(u_old, grid);

  PolicyIterReport report;
  for (int k = 1; k <= cfg.max_iters; ++k) {
    ValueFunctionApprox V = solve_galerkin(assemble_system(plant, u_old, basis, quad), basis);
    Policy u_new = greedy_policy(plant, V);
    std::vector<Vec> u_new_samples = sample(u_new, grid);
    const StoppingMetrics m = metrics_from_samples(u_new_samples, u_old_samples);

    double sq = 0.0;
    for (const auto& z : grid) {
      const double r = hjb_residual_at(plant, V, z);
      sq += r * r;
    }
    const double rms = std::sqrt(sq / static_cast<double>(grid.size()));

    report.iterations = k;
    report.delta_abs_history.push_back(m.delta_abs);
    report.delta_rel_history.push_back(m.delta_rel);
    report.hjb_residual_history.push_back(rms);
    report.final_hjb_residual = rms;
    report.V = std::move(V);
    if (log) {
      *log << "iteration " << k << std::scientific << std::setprecision(6)
           << " delta_abs=" << m.delta_abs << " delta_rel=" << m.delta_rel
           << " hjb_rms=" << rms << std::defaultfloat << '\n';
    }
    if (m.delta_abs <= cfg.tol_abs || m.delta_rel <= cfg.tol_rel) {
      report.V = report.V.anchored();
      return report;
    }

    u_old = std::move(u_new);
    u_old_samples = std::move(u_new_samples);
  }

  std::ostringstream msg;
  msg << "policy iteration did not converge in " << cfg.max_iters
      << " iterations; last delta_abs=" << report.delta_abs_history.back()
      << " delta_rel=" << report.delta_rel_history.back();
  throw NonConvergence(msg.str(), report.delta_abs_history);
}

}  // namespace pasctl
