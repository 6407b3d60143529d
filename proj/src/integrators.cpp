#include "pasctl/integrators.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <string>

#include "pasctl/errors.hpp"
#include "pasctl/smalllin.hpp"

namespace pasctl {

NewtonResult newton_solve(const VectorField& residual, const MatrixField& jacobian, Vec x0,
                          const NewtonOptions& opts) {
  Vec x = std::move(x0);
  Vec res = residual(x);
  double norm = res.norm();
  int iterations = 0;

  auto newton_update = [&](const Vec& point, const Vec& value) -> Vec {
    const Mat J = jacobian ? jacobian(point) : fd_jacobian(residual, point);
    try {
      return point - solve_linear(J, value);
    } catch (const SingularMatrix&) {
      throw NewtonDivergence("newton_solve: singular Jacobian", point, value.norm(), iterations);
    }
  };

  while (iterations < opts.fixed_iterations || norm > opts.tol) {
    if (iterations >= std::max(opts.max_iter, opts.fixed_iterations) ||
        (opts.fixed_iterations > 0 && iterations >= opts.fixed_iterations)) {
      throw NewtonDivergence("newton_solve: no convergence after " +
                                 std::to_string(iterations) + " iterations",
                             x, norm, iterations);
    }
    x = newton_update(x, res);
    res = residual(x);
    const double previous = norm;
    norm = res.norm();
    ++iterations;
    if (!std::isfinite(norm)) {
      throw NewtonDivergence("newton_solve: iterate diverged", x, norm, iterations);
    }
    if (iterations >= opts.fixed_iterations && norm <= opts.stall_tol && norm > 0.5 * previous) {
      break;
    }
  }

  for (int p = 0; p < opts.polish && norm > 0.0; ++p) {
    Vec candidate;
    try {
      candidate = newton_update(x, res);
    } catch (const NewtonDivergence&) {
      break;
    }
    const Vec cand_res = residual(candidate);
    const double cand_norm = cand_res.norm();
    if (!(cand_norm < norm)) break;
    x = std::move(candidate);
    res = cand_res;
    norm = cand_norm;
    ++iterations;
  }
  return {x, norm, iterations};
}

Vec discrete_gradient(const ScalarField& H, const VectorField& eta, const Vec& z1,
                      const Vec& z2) {
  const Vec dz = z2 - z1;
  const Vec mid = 0.5 * (z1 + z2);
  const Vec eta_mid = eta(mid);
  const double dist = dz.norm();
  if (dist < 1e-12 * (1.0 + z1.norm())) return eta_mid;
  return eta_mid + ((H(z2) - H(z1) - eta_mid.dot(dz)) / (dist * dist)) * dz;
}

DgSystem controller_dg_system(const PassiveController& controller, double trust_factor) {
  const PassiveController c = controller;
  const Rectangle box = c.value_function().basis().domain.scaled(trust_factor);
  DgSystem sys;
  sys.storage = c.storage();
  sys.drift = [c](const Vec& z) { return c.drift(z); };
  sys.B = c.plant().B;
  sys.trust_box = std::pair{Vec(Eigen::Vector2d(box.x_lo, box.y_lo)),
                            Vec(Eigen::Vector2d(box.x_hi, box.y_hi))};
  return sys;
}

DgSystem plant_dg_system(const PlantModel& plant, std::optional<std::pair<Vec, Vec>> trust_box) {
  if (!plant.storage) {
    throw UnsupportedOperation("plant '" + plant.name + "' has no storage function");
  }
  return DgSystem{*plant.storage, plant.f, plant.B, std::move(trust_box)};
}

Vec invert_gradient(const DgSystem& sys, const Vec& v, const Vec& z_hint) {
  NewtonOptions opts;
  opts.tol = 1e-11;
  opts.fixed_iterations = 10;
  const auto& st = sys.storage;
  const Vec z = newton_solve([&](const Vec& x) -> Vec { return st.eta(x) - v; }, st.Deta,
                             z_hint, opts)
                    .x;
  if (sys.trust_box) {
    const auto& [lo, hi] = *sys.trust_box;
    if ((z.array() < lo.array()).any() || (z.array() > hi.array()).any()) {
      throw RangeError("gradient inversion left the trust region; eta is not invertible there");
    }
  }
  return z;
}

Vec eval_r(const DgSystem& sys, const Vec& v, const Vec& z_hint) {
  return -sys.drift(invert_gradient(sys, v, z_hint));
}

DgStep dg_step(const DgSystem& sys, const Vec& z, const Vec& u_bar, double dt) {
  if (!(dt > 0.0)) throw ConfigError("dg_step: time step must be positive");
  const auto& st = sys.storage;

  auto terms = [&](const Vec& z_next) {
    DgStep s;
    s.z_next = z_next;
    const Vec mid = 0.5 * (z + z_next);
    s.eta_bar = discrete_gradient(st.H, st.eta, z, z_next);
    s.r = eval_r(sys, s.eta_bar, mid);
    const Mat B_bar = sys.B(mid);
    s.y_bar = B_bar.transpose() * s.eta_bar;
    return std::pair{s, Vec(z_next - z + dt * s.r - dt * (B_bar * u_bar))};
  };

  const Vec predictor = z + dt * (sys.drift(z) + sys.B(z) * u_bar);
  NewtonOptions opts;
  opts.tol = 1e-12 * (1.0 + z.norm());
  opts.stall_tol = 1e-10 * (1.0 + z.norm());
  opts.max_iter = 50;
  opts.polish = 2;
  const auto solved =
      newton_solve([&](const Vec& x) { return terms(x).second; }, MatrixField{}, predictor, opts);

  DgStep s = terms(solved.x).first;
  s.storage_rate = (st.H(s.z_next) - st.H(z)) / dt;
  s.dissipation = s.eta_bar.dot(s.r);
  s.supply = s.y_bar.dot(u_bar);
  return s;
}

Vec midpoint_step(const InputRhs& rhs, const Vec& x, double dt, const Vec& u_bar) {
  if (!(dt > 0.0)) throw ConfigError("midpoint_step: time step must be positive");
  const Vec predictor = x + dt * rhs(x, u_bar);
  NewtonOptions opts;
  opts.tol = 1e-12 * (1.0 + x.norm());
  opts.stall_tol = 1e-10 * (1.0 + x.norm());
  opts.max_iter = 50;
  opts.polish = 1;
  return newton_solve(
             [&](const Vec& xn) -> Vec { return xn - x - dt * rhs(0.5 * (x + xn), u_bar); },
             MatrixField{}, predictor, opts)
      .x;
}

TimeGrid TimeGrid::uniform(double T, int m) {
  if (m < 2) throw ConfigError("time grid needs at least two points");
  if (!(T > 0.0)) throw ConfigError("time horizon must be positive");
  TimeGrid g;
  g.t.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) g.t[static_cast<std::size_t>(i)] = T * i / (m - 1);
  return g;
}

void TimeGrid::validate() const {
  if (t.size() < 2) throw ConfigError("time grid needs at least two points");
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (!(t[i] > t[i - 1])) throw ConfigError("time grid must be strictly increasing");
  }
}

void Trajectory::write_csv(std::ostream& os) const {
  const std::size_t n = states.empty() ? 0 : static_cast<std::size_t>(states.front().size());
  const std::size_t m = inputs.empty() ? 0 : static_cast<std::size_t>(inputs.front().size());
  const std::size_t p = outputs.empty() ? 0 : static_cast<std::size_t>(outputs.front().size());
  os << 't';
  for (std::size_t k = 1; k <= n; ++k) os << ",z_" << k;
  for (std::size_t k = 1; k <= m; ++k) os << ",u_" << k;
  for (std::size_t k = 1; k <= p; ++k) os << ",y_" << k;
  os << ",H,power_residual\n";
  os << std::setprecision(17);
  for (std::size_t i = 0; i < states.size(); ++i) {
    os << grid.t[i];
    for (Eigen::Index k = 0; k < states[i].size(); ++k) os << ',' << states[i](k);
    if (m > 0)
      for (Eigen::Index k = 0; k < inputs[i].size(); ++k) os << ',' << inputs[i](k);
    if (p > 0)
      for (Eigen::Index k = 0; k < outputs[i].size(); ++k) os << ',' << outputs[i](k);
    os << ',' << (i < storage.size() ? storage[i] : 0.0) << ','
       << (i < power_residual.size() ? power_residual[i] : 0.0) << '\n';
  }
}

namespace {

template <typename Fn>
auto at_step(std::size_t i, Fn&& fn) {
  try {
    return fn();
  } catch (const NewtonDivergence& e) {
    throw NewtonDivergence("step " + std::to_string(i) + ": " + e.what() +
                               " (try a smaller time step)",
                           e.last_iterate(), e.residual_norm(), e.iterations());
  } catch (const RangeError& e) {
    throw RangeError("step " + std::to_string(i) + ": " + e.what());
  }
}

}  // namespace

namespace {

void record_midpoint(Trajectory& traj, const InputSignal& input, const MidpointRecorder& rec) {
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    const Vec& x = traj.states[i];
    const double t = traj.grid.t[i];
    if (input) {
      traj.inputs.push_back(input(t));
    } else if (rec.input) {
      traj.inputs.push_back(rec.input(t, x));
    }
    if (rec.output) traj.outputs.push_back(rec.output(x));
    traj.storage.push_back(rec.storage ? rec.storage(x) : 0.0);
    traj.power_residual.push_back(0.0);
  }
}

void record_dg(Trajectory& traj, const DgSystem& sys, const std::function<Vec(double)>& u_at) {
  double max_rate = 0.0;
  for (const auto& s : traj.steps) max_rate = std::max(max_rate, std::abs(s.storage_rate));
  traj.power_residual.push_back(0.0);
  for (const auto& s : traj.steps) {
    traj.power_residual.push_back(max_rate > 0.0 ? std::abs(s.balance_defect()) / max_rate
                                                 : std::abs(s.balance_defect()));
  }
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    const Vec& z = traj.states[i];
    traj.inputs.push_back(u_at(traj.grid.t[i]));
    traj.outputs.push_back(sys.B(z).transpose() * sys.storage.eta(z));
    traj.storage.push_back(sys.storage.H(z));
  }
}

}  // namespace

Trajectory simulate_midpoint(const InputRhs& rhs, const TimeGrid& grid, const Vec& x0,
                             const InputSignal& input, const MidpointRecorder& rec,
                             Trajectory* partial) {
  grid.validate();
  Trajectory traj;
  traj.grid = grid;
  const std::size_t m = grid.size();
  traj.states.reserve(m);
  traj.states.push_back(x0);

  try {
    for (std::size_t i = 0; i + 1 < m; ++i) {
      const double dt = grid.t[i + 1] - grid.t[i];
      const Vec u_bar = input ? Vec(0.5 * (input(grid.t[i]) + input(grid.t[i + 1]))) : Vec();
      traj.states.push_back(
          at_step(i, [&] { return midpoint_step(rhs, traj.states.back(), dt, u_bar); }));
    }
  } catch (const Error&) {
    if (partial) {
      *partial = traj;
      record_midpoint(*partial, input, rec);
    }
    throw;
  }
  record_midpoint(traj, input, rec);
  return traj;
}

Trajectory simulate_dg(const DgSystem& sys, const TimeGrid& grid, const Vec& z0,
                       const InputSignal& input, int input_size, Trajectory* partial) {
  grid.validate();
  Trajectory traj;
  traj.grid = grid;
  const std::size_t m = grid.size();
  const std::function<Vec(double)> u_at = [&](double t) -> Vec {
    return input ? input(t) : Vec(Vec::Zero(input_size));
  };

  traj.states.push_back(z0);
  try {
    for (std::size_t i = 0; i + 1 < m; ++i) {
      const double dt = grid.t[i + 1] - grid.t[i];
      const Vec u_bar = 0.5 * (u_at(grid.t[i]) + u_at(grid.t[i + 1]));
      traj.steps.push_back(
          at_step(i, [&] { return dg_step(sys, traj.states.back(), u_bar, dt); }));
      traj.states.push_back(traj.steps.back().z_next);
    }
  } catch (const Error&) {
    if (partial) {
      *partial = traj;
      record_dg(*partial, sys, u_at);
    }
    throw;
  }
  record_dg(traj, sys, u_at);
  return traj;
}

Trajectory simulate_closed_loop(const ClosedLoop& loop, const TimeGrid& grid, const Vec& x0,
                                const ScalarField& storage, Trajectory* partial) {
  const int n = loop.plant().n;
  MidpointRecorder rec;
  rec.input = [&loop](double, const Vec& x) { return loop.plant_input(x); };
  rec.output = [&loop](const Vec& x) { return loop.plant_output(x); };
  if (storage) {
    rec.storage = storage;
  } else if (loop.plant().storage) {
    rec.storage = [H = loop.plant().storage->H, n](const Vec& x) { return H(x.head(n)); };
  }
  return simulate_midpoint([&loop](const Vec& x, const Vec&) { return loop.rhs(x); }, grid, x0,
                           InputSignal{}, rec, partial);
}

}  // namespace pasctl
