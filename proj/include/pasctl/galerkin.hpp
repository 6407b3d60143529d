#pragma once

#include <filesystem>
#include <iosfwd>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "pasctl/models.hpp"

namespace pasctl {

/// Axis-aligned box [x_lo, x_hi] x [y_lo, y_hi].
struct Rectangle {
  double x_lo = -3.0;
  double x_hi = 3.0;
  double y_lo = -3.0;
  double y_hi = 3.0;

  /// Throws ConfigError unless x_lo < x_hi and y_lo < y_hi.
  void validate() const;
  double area() const { return (x_hi - x_lo) * (y_hi - y_lo); }
  bool contains(double x, double y) const {
    return x >= x_lo && x <= x_hi && y >= y_lo && y <= y_hi;
  }
  /// Same center, half-widths multiplied by `factor`.
  Rectangle scaled(double factor) const;
};

/// Value and first derivative of the 1-based orthonormal Legendre function
/// phi_i on [a, b] (polynomial degree i - 1).
std::pair<double, double> legendre_eval(int i, double x, double a, double b);

/// Values and first two derivatives of phi_1..phi_d at x on [a, b].
struct LegendreTable {
  Eigen::VectorXd value;
  Eigen::VectorXd d1;
  Eigen::VectorXd d2;
};
LegendreTable legendre_table(int d, double x, double a, double b);

/// Tensor basis psi_{ij}(z) = phi_i(z_1) phi_j(z_2), 1 <= i, j <= degree.
struct LegendreBasis {
  int degree = 0;
  Rectangle domain;

  LegendreBasis() = default;
  LegendreBasis(int d, Rectangle dom);

  /// Number of modes without the pure-constant mode: d^2 - 1.
  int active_size() const { return degree * degree - 1; }
};

struct QuadratureRule {
  std::vector<Eigen::Vector2d> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre nodes and weights on [a, b].
std::pair<std::vector<double>, std::vector<double>> gauss_legendre_1d(int n, double a,
                                                                      double b);

/// Tensor Gauss-Legendre rule with n_q nodes per axis.
QuadratureRule gauss_rule(int n_q, const Rectangle& domain);

struct VfaEval {
  double value = 0.0;
  Eigen::Vector2d gradient = Eigen::Vector2d::Zero();
  Eigen::Matrix2d hessian = Eigen::Matrix2d::Zero();
  /// True when the point lies outside the basis domain.
  bool extrapolated = false;
};

/// V(z) = V_raw(z) - V_raw(0) with V_raw = sum alpha_{ij} psi_{ij}, so V(0) = 0.
/// alpha(0, 0) is pinned to zero. An anchored copy also subtracts grad V_raw(0)^T z.
class ValueFunctionApprox {
 public:
  ValueFunctionApprox() = default;
  ValueFunctionApprox(LegendreBasis basis, Eigen::MatrixXd alpha);

  const LegendreBasis& basis() const { return basis_; }
  const Eigen::MatrixXd& alpha() const { return alpha_; }

  /// Coefficients with the constant mode dropped, ordered row-major.
  Eigen::VectorXd active_coefficients() const;
  static ValueFunctionApprox from_active(const LegendreBasis& basis,
                                         const Eigen::VectorXd& coefficients);

  /// Copy with grad V(0) = 0 enforced exactly.
  ValueFunctionApprox anchored() const;
  bool is_anchored() const { return anchored_; }

  VfaEval eval(const Eigen::Vector2d& z) const;
  double value(const Eigen::Vector2d& z) const { return eval(z).value; }
  Eigen::Vector2d gradient(const Eigen::Vector2d& z) const { return eval(z).gradient; }

  /// Storage view (value, gradient, Hessian) for n = 2 plants.
  StorageFunction as_storage() const;

  /// Header line "d,x_lo,x_hi,y_lo,y_hi", one data line, then d rows of alpha,
  /// all numbers with 17 significant digits.
  void write_csv(std::ostream& os) const;
  static ValueFunctionApprox read_csv(std::istream& is);
  void save(const std::filesystem::path& path) const;
  static ValueFunctionApprox load(const std::filesystem::path& path);

 private:
  double raw_value(const Eigen::Vector2d& z) const;

  LegendreBasis basis_;
  Eigen::MatrixXd alpha_;
  double shift_ = 0.0;
  Eigen::Vector2d shift_gradient_ = Eigen::Vector2d::Zero();
  bool anchored_ = false;
};

VfaEval eval_vfa(const ValueFunctionApprox& V, const Eigen::Vector2d& z);

/// L2 projection of g onto the basis (constant mode dropped) under `quad`.
ValueFunctionApprox project(const LegendreBasis& basis, const ScalarField& g,
                            const QuadratureRule& quad);

/// Row-major index of mode (i, j) (0-based) in the active coefficient vector.
inline int active_index(int i, int j, int degree) { return i * degree + j - 1; }

}  // namespace pasctl
