#include "pasctl/galerkin.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <string>

#include "pasctl/errors.hpp"

namespace pasctl {

void Rectangle::validate() const {
  if (!(x_lo < x_hi) || !(y_lo < y_hi)) {
    throw ConfigError("Rectangle: require x_lo < x_hi and y_lo < y_hi");
  }
}

Rectangle Rectangle::scaled(double factor) const {
  const double cx = 0.5 * (x_lo + x_hi);
  const double cy = 0.5 * (y_lo + y_hi);
  const double hx = 0.5 * (x_hi - x_lo) * factor;
  const double hy = 0.5 * (y_hi - y_lo) * factor;
  return {cx - hx, cx + hx, cy - hy, cy + hy};
}

LegendreTable legendre_table(int d, double x, double a, double b) {
  LegendreTable out{Eigen::VectorXd(d), Eigen::VectorXd(d), Eigen::VectorXd(d)};
  const double len = b - a;
  const double t = (2.0 * x - a - b) / len;
  const double dt = 2.0 / len;

  // Legendre P_k(t) and its first two t-derivatives.
  double p_prev = 0.0, p = 1.0;
  double dp_prev = 0.0, dp = 0.0;
  double ddp_prev = 0.0, ddp = 0.0;
  for (int k = 0; k < d; ++k) {
    const double scale = std::sqrt((2.0 * k + 1.0) / len);
    out.value(k) = scale * p;
    out.d1(k) = scale * dp * dt;
    out.d2(k) = scale * ddp * dt * dt;

    // (k+1) P_{k+1} = (2k+1) t P_k - k P_{k-1};  P'_{k+1} = P'_{k-1} + (2k+1) P_k.
    const double p_next = ((2.0 * k + 1.0) * t * p - k * p_prev) / (k + 1.0);
    const double dp_next = dp_prev + (2.0 * k + 1.0) * p;
    const double ddp_next = ddp_prev + (2.0 * k + 1.0) * dp;
    p_prev = p;
    p = p_next;
    dp_prev = dp;
    dp = dp_next;
    ddp_prev = ddp;
    ddp = ddp_next;
  }
  return out;
}

std::pair<double, double> legendre_eval(int i, double x, double a, double b) {
  if (i < 1) throw ConfigError("legendre_eval: index is 1-based");
  if (!(a < b)) throw ConfigError("legendre_eval: require a < b");
  const auto tab = legendre_table(i, x, a, b);
  return {tab.value(i - 1), tab.d1(i - 1)};
}

LegendreBasis::LegendreBasis(int d, Rectangle dom) : degree(d), domain(dom) {
  if (d < 1) throw ConfigError("LegendreBasis: degree must be positive");
  domain.validate();
}

std::pair<std::vector<double>, std::vector<double>> gauss_legendre_1d(int n, double a,
                                                                      double b) {
  if (n < 1) throw ConfigError("gauss_legendre_1d: need at least one node");
  std::vector<double> nodes(static_cast<std::size_t>(n));
  std::vector<double> weights(static_cast<std::size_t>(n));
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  // Legendre P_n(t) and P_{n-1}(t) by the three-term recurrence.
  auto legendre_pair = [n](double t) {
    double p0 = 1.0, p1 = t;
    for (int k = 1; k < n; ++k) {
      const double p2 = ((2.0 * k + 1.0) * t * p1 - k * p0) / (k + 1.0);
      p0 = p1;
      p1 = p2;
    }
    return std::pair{p1, p0};
  };
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double t = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [pn, pn1] = legendre_pair(t);
      const double step = pn / (n * (t * pn - pn1) / (t * t - 1.0));
      t -= step;
      if (std::abs(step) < 1e-16) break;
    }
    const auto [pn, pn1] = legendre_pair(t);
    const double dp = n * (t * pn - pn1) / (t * t - 1.0);
    const double w = 2.0 / ((1.0 - t * t) * dp * dp);
    const auto lo = static_cast<std::size_t>(i);
    const auto hi = static_cast<std::size_t>(n - 1 - i);
    nodes[lo] = mid - half * t;
    nodes[hi] = mid + half * t;
    weights[lo] = weights[hi] = half * w;
  }
  if (n % 2 == 1) nodes[static_cast<std::size_t>(n / 2)] = mid;
  return {nodes, weights};
}

QuadratureRule gauss_rule(int n_q, const Rectangle& domain) {
  domain.validate();
  const auto [xs, wx] = gauss_legendre_1d(n_q, domain.x_lo, domain.x_hi);
  const auto [ys, wy] = gauss_legendre_1d(n_q, domain.y_lo, domain.y_hi);
  QuadratureRule rule;
  rule.nodes.reserve(xs.size() * ys.size());
  rule.weights.reserve(xs.size() * ys.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = 0; j < ys.size(); ++j) {
      rule.nodes.emplace_back(xs[i], ys[j]);
      rule.weights.push_back(wx[i] * wy[j]);
    }
  }
  return rule;
}

ValueFunctionApprox::ValueFunctionApprox(LegendreBasis basis, Eigen::MatrixXd alpha)
    : basis_(std::move(basis)), alpha_(std::move(alpha)) {
  if (alpha_.rows() != basis_.degree || alpha_.cols() != basis_.degree) {
    throw ConfigError("ValueFunctionApprox: coefficient grid must be d x d");
  }
  alpha_(0, 0) = 0.0;
  shift_ = raw_value(Eigen::Vector2d::Zero());
}

ValueFunctionApprox ValueFunctionApprox::anchored() const {
  ValueFunctionApprox out = *this;
  if (!anchored_) {
    out.shift_gradient_ = eval(Eigen::Vector2d::Zero()).gradient;
    out.anchored_ = true;
  }
  return out;
}

Eigen::VectorXd ValueFunctionApprox::active_coefficients() const {
  const int d = basis_.degree;
  Eigen::VectorXd c(basis_.active_size());
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      if (i != 0 || j != 0) c(active_index(i, j, d)) = alpha_(i, j);
  return c;
}

ValueFunctionApprox ValueFunctionApprox::from_active(const LegendreBasis& basis,
                                                     const Eigen::VectorXd& coefficients) {
  const int d = basis.degree;
  if (coefficients.size() != basis.active_size()) {
    throw ConfigError("ValueFunctionApprox: expected d^2 - 1 coefficients");
  }
  Eigen::MatrixXd alpha = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      if (i != 0 || j != 0) alpha(i, j) = coefficients(active_index(i, j, d));
  return ValueFunctionApprox(basis, alpha);
}

double ValueFunctionApprox::raw_value(const Eigen::Vector2d& z) const {
  const auto& dom = basis_.domain;
  const auto tx = legendre_table(basis_.degree, z(0), dom.x_lo, dom.x_hi);
  const auto ty = legendre_table(basis_.degree, z(1), dom.y_lo, dom.y_hi);
  return tx.value.dot(alpha_ * ty.value);
}

VfaEval ValueFunctionApprox::eval(const Eigen::Vector2d& z) const {
  const auto& dom = basis_.domain;
  const auto tx = legendre_table(basis_.degree, z(0), dom.x_lo, dom.x_hi);
  const auto ty = legendre_table(basis_.degree, z(1), dom.y_lo, dom.y_hi);
  const Eigen::VectorXd a_vy = alpha_ * ty.value;
  const Eigen::VectorXd a_dy = alpha_ * ty.d1;

  VfaEval out;
  out.gradient << tx.d1.dot(a_vy), tx.value.dot(a_dy);
  out.gradient -= shift_gradient_;
  out.value = tx.value.dot(a_vy) - shift_ - shift_gradient_.dot(z);
  const double hxy = tx.d1.dot(a_dy);
  out.hessian << tx.d2.dot(a_vy), hxy, hxy, tx.value.dot(alpha_ * ty.d2);
  out.extrapolated = !dom.contains(z(0), z(1));
  return out;
}

StorageFunction ValueFunctionApprox::as_storage() const {
  const ValueFunctionApprox self = *this;
  return StorageFunction{
      [self](const Vec& z) { return self.eval(z.head<2>()).value; },
      [self](const Vec& z) -> Vec { return self.eval(z.head<2>()).gradient; },
      [self](const Vec& z) -> Mat { return self.eval(z.head<2>()).hessian; },
  };
}

VfaEval eval_vfa(const ValueFunctionApprox& V, const Eigen::Vector2d& z) { return V.eval(z); }

void ValueFunctionApprox::write_csv(std::ostream& os) const {
  const auto& dom = basis_.domain;
  os << std::setprecision(17);
  os << "d,x_lo,x_hi,y_lo,y_hi\n";
  os << basis_.degree << ',' << dom.x_lo << ',' << dom.x_hi << ',' << dom.y_lo << ','
     << dom.y_hi << '\n';
  for (int i = 0; i < basis_.degree; ++i) {
    for (int j = 0; j < basis_.degree; ++j) {
      if (j > 0) os << ',';
      os << alpha_(i, j);
    }
    os << '\n';
  }
}

namespace {

std::vector<double> parse_csv_numbers(const std::string& line) {
  std::vector<double> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      out.push_back(std::stod(cell));
    } catch (const std::exception&) {
      throw ConfigError("value-function file: cannot parse number '" + cell + "'");
    }
  }
  return out;
}

}  // namespace

ValueFunctionApprox ValueFunctionApprox::read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("d,x_lo", 0) != 0) {
    throw ConfigError("value-function file: missing header");
  }
  if (!std::getline(is, line)) throw ConfigError("value-function file: missing basis line");
  const auto head = parse_csv_numbers(line);
  if (head.size() != 5) throw ConfigError("value-function file: malformed basis line");
  const int d = static_cast<int>(head[0]);
  LegendreBasis basis(d, Rectangle{head[1], head[2], head[3], head[4]});
  Eigen::MatrixXd alpha(d, d);
  for (int i = 0; i < d; ++i) {
    if (!std::getline(is, line)) throw ConfigError("value-function file: truncated grid");
    const auto row = parse_csv_numbers(line);
    if (static_cast<int>(row.size()) != d) {
      throw ConfigError("value-function file: row has wrong length");
    }
    for (int j = 0; j < d; ++j) alpha(i, j) = row[static_cast<std::size_t>(j)];
  }
  return ValueFunctionApprox(basis, alpha);
}

void ValueFunctionApprox::save(const std::filesystem::path& path) const {
  std::ofstream os(path);
  if (!os) throw Error("cannot open '" + path.string() + "' for writing");
  write_csv(os);
}

ValueFunctionApprox ValueFunctionApprox::load(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open value-function file '" + path.string() + "'");
  return read_csv(is);
}

ValueFunctionApprox project(const LegendreBasis& basis, const ScalarField& g,
                            const QuadratureRule& quad) {
  const int d = basis.degree;
  const auto& dom = basis.domain;
  Eigen::MatrixXd alpha = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t q = 0; q < quad.nodes.size(); ++q) {
    const auto& z = quad.nodes[q];
    const auto tx = legendre_table(d, z(0), dom.x_lo, dom.x_hi);
    const auto ty = legendre_table(d, z(1), dom.y_lo, dom.y_hi);
    alpha += (quad.weights[q] * g(z)) * tx.value * ty.value.transpose();
  }
  return ValueFunctionApprox(basis, alpha);
}

}  // namespace pasctl
