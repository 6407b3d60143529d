#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "pasctl/errors.hpp"
#include "pasctl/galerkin.hpp"

using namespace pasctl;

namespace {

const Rectangle unit_box{-1.0, 1.0, -1.0, 1.0};

/// Orthonormal Legendre of degree <= 2 on [-1, 1] written out by hand.
double phi_closed_form(int i, double x) {
  switch (i) {
    case 1: return 1.0 / std::sqrt(2.0);
    case 2: return std::sqrt(1.5) * x;
    case 3: return std::sqrt(2.5) * 0.5 * (3.0 * x * x - 1.0);
    default: return NAN;
  }
}

double gram_entry(const QuadratureRule& q, int d, int a, int b) {
  const auto& dom = unit_box;
  double s = 0.0;
  for (std::size_t k = 0; k < q.nodes.size(); ++k) {
    const auto& z = q.nodes[k];
    const double pa = legendre_eval(a / d + 1, z(0), dom.x_lo, dom.x_hi).first *
                      legendre_eval(a % d + 1, z(1), dom.y_lo, dom.y_hi).first;
    const double pb = legendre_eval(b / d + 1, z(0), dom.x_lo, dom.x_hi).first *
                      legendre_eval(b % d + 1, z(1), dom.y_lo, dom.y_hi).first;
    s += q.weights[k] * pa * pb;
  }
  return s;
}

}  // namespace

TEST(Rectangle, Validation) {
  EXPECT_NO_THROW(unit_box.validate());
  EXPECT_THROW((Rectangle{1.0, 1.0, 0.0, 1.0}.validate()), ConfigError);
  EXPECT_THROW((Rectangle{0.0, 1.0, 2.0, -2.0}.validate()), ConfigError);
  EXPECT_DOUBLE_EQ(Rectangle{}.area(), 36.0);
  const Rectangle s = Rectangle{0.0, 2.0, -1.0, 3.0}.scaled(0.5);
  EXPECT_DOUBLE_EQ(s.x_lo, 0.5);
  EXPECT_DOUBLE_EQ(s.x_hi, 1.5);
  EXPECT_DOUBLE_EQ(s.y_lo, 0.0);
  EXPECT_DOUBLE_EQ(s.y_hi, 2.0);
}

TEST(LegendreEval, ConstantMode) {
  for (double x : {-1.0, -0.3, 0.0, 0.7, 1.0}) {
    const auto [v, dv] = legendre_eval(1, x, -1.0, 1.0);
    EXPECT_NEAR(v, 1.0 / std::sqrt(2.0), 1e-15);
    EXPECT_EQ(dv, 0.0);
  }
}

TEST(LegendreEval, LinearModeAtRightEnd) {
  const auto [v, dv] = legendre_eval(2, 1.0, -1.0, 1.0);
  EXPECT_NEAR(v, std::sqrt(1.5), 1e-15);
  EXPECT_NEAR(dv, std::sqrt(1.5), 1e-15);
}

TEST(LegendreEval, AffinePullback) {
  const double a = -0.5, b = 2.5, L = b - a;
  const auto [v, dv] = legendre_eval(2, b, a, b);
  EXPECT_NEAR(v, std::sqrt(3.0 / L), 1e-14);
  EXPECT_NEAR(dv, 2.0 * std::sqrt(3.0 / L) / L, 1e-14);
}

TEST(LegendreEval, MatchesClosedFormUpToDegreeTwo) {
  for (int i = 1; i <= 3; ++i) {
    for (double x = -1.0; x <= 1.0; x += 0.125) {
      EXPECT_NEAR(legendre_eval(i, x, -1.0, 1.0).first, phi_closed_form(i, x), 1e-14);
    }
  }
}

TEST(LegendreTable, DerivativesMatchFiniteDifferences) {
  const int d = 15;
  const double h = 1e-5;
  for (double x : {-2.7, -1.1, 0.0, 0.4, 2.9}) {
    const auto t = legendre_table(d, x, -3.0, 3.0);
    const auto tp = legendre_table(d, x + h, -3.0, 3.0);
    const auto tm = legendre_table(d, x - h, -3.0, 3.0);
    for (int i = 0; i < d; ++i) {
      EXPECT_NEAR(t.d1(i), (tp.value(i) - tm.value(i)) / (2 * h), 1e-6 * (1 + std::abs(t.d1(i))));
      EXPECT_NEAR(t.d2(i), (tp.d1(i) - tm.d1(i)) / (2 * h), 1e-5 * (1 + std::abs(t.d2(i))));
      EXPECT_EQ(t.value(i), legendre_eval(i + 1, x, -3.0, 3.0).first);
    }
  }
}

TEST(GaussLegendre, SingleNode) {
  const QuadratureRule q = gauss_rule(1, unit_box);
  ASSERT_EQ(q.nodes.size(), 1u);
  EXPECT_NEAR(q.nodes[0].norm(), 0.0, 1e-15);
  EXPECT_NEAR(q.weights[0], 4.0, 1e-15);
}

TEST(GaussLegendre, TwoNodesIntegrateCubicsExactly) {
  const QuadratureRule q = gauss_rule(2, unit_box);
  double s = 0.0, s3 = 0.0;
  for (std::size_t k = 0; k < q.nodes.size(); ++k) {
    s += q.weights[k] * q.nodes[k](0) * q.nodes[k](0);
    s3 += q.weights[k] * std::pow(q.nodes[k](0), 3) * q.nodes[k](1);
  }
  EXPECT_NEAR(s, 4.0 / 3.0, 1e-15);
  EXPECT_NEAR(s3, 0.0, 1e-15);
}

TEST(GaussLegendre, WeightsSumToArea) {
  const Rectangle dom{-2.0, 2.0, -1.8, 3.0};
  for (int n : {1, 3, 8, 22, 32}) {
    const QuadratureRule q = gauss_rule(n, dom);
    double s = 0.0;
    for (double w : q.weights) s += w;
    EXPECT_NEAR(s, dom.area(), 1e-12 * dom.area()) << n;
  }
}

TEST(GaussLegendre, ExactForPolynomialDegree2nMinus1) {
  for (int n = 1; n <= 12; ++n) {
    const auto [x, w] = gauss_legendre_1d(n, 0.0, 2.0);
    const int p = 2 * n - 1;
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += w[k] * std::pow(x[k], p);
    EXPECT_NEAR(s, std::pow(2.0, p + 1) / (p + 1), 1e-12 * std::pow(2.0, p + 1)) << n;
  }
}

TEST(LegendreBasis, GramMatrixIsIdentity) {
  for (int d : {2, 5, 10, 15}) {
    const QuadratureRule q = gauss_rule(d + 1, unit_box);
    double worst = 0.0;
    for (int a = 0; a < d * d; ++a) {
      for (int b = a; b < d * d; ++b) {
        worst = std::max(worst, std::abs(gram_entry(q, d, a, b) - (a == b ? 1.0 : 0.0)));
      }
    }
    EXPECT_LT(worst, 1e-12) << "d=" << d;
  }
}

TEST(LegendreBasis, ActiveSize) {
  EXPECT_EQ(LegendreBasis(10, unit_box).active_size(), 99);
  EXPECT_EQ(active_index(0, 1, 10), 0);
  EXPECT_EQ(active_index(1, 0, 10), 9);
  EXPECT_EQ(active_index(9, 9, 10), 98);
}

TEST(ValueFunctionApprox, ZeroCoefficients) {
  const ValueFunctionApprox V(LegendreBasis(4, unit_box), Eigen::MatrixXd::Zero(4, 4));
  const VfaEval e = V.eval(Eigen::Vector2d(0.3, -0.2));
  EXPECT_EQ(e.value, 0.0);
  EXPECT_EQ(e.gradient, Eigen::Vector2d::Zero());
  EXPECT_EQ(e.hessian, Eigen::Matrix2d::Zero());
}

TEST(ValueFunctionApprox, SingleLinearModeIsProductOfOneDimensionalFormulas) {
  Eigen::MatrixXd alpha = Eigen::MatrixXd::Zero(3, 3);
  alpha(1, 0) = 1.0;
  const ValueFunctionApprox V(LegendreBasis(3, unit_box), alpha);
  for (double x : {-0.9, 0.2, 0.75}) {
    for (double y : {-0.5, 0.6}) {
      EXPECT_NEAR(V.value(Eigen::Vector2d(x, y)), std::sqrt(1.5) * x / std::sqrt(2.0), 1e-15);
    }
  }
}

TEST(ValueFunctionApprox, ConstantModeIsPinned) {
  Eigen::MatrixXd alpha = Eigen::MatrixXd::Zero(3, 3);
  alpha(0, 0) = 7.0;
  const ValueFunctionApprox V(LegendreBasis(3, unit_box), alpha);
  EXPECT_EQ(V.alpha()(0, 0), 0.0);
  EXPECT_EQ(V.value(Eigen::Vector2d(0.4, 0.4)), 0.0);
}

TEST(ValueFunctionApprox, MatchesMonomialExpansion) {
  std::mt19937 rng(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int d = 2; d <= 3; ++d) {
    Eigen::MatrixXd alpha = Eigen::MatrixXd::NullaryExpr(d, d, [&] { return u(rng); });
    const ValueFunctionApprox V(LegendreBasis(d, unit_box), alpha);
    auto raw = [&](double x, double y) {
      double s = 0.0;
      for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
          if (i == 0 && j == 0) continue;
          s += alpha(i, j) * phi_closed_form(i + 1, x) * phi_closed_form(j + 1, y);
        }
      }
      return s;
    };
    for (int k = 0; k < 20; ++k) {
      const double x = u(rng), y = u(rng);
      const VfaEval e = V.eval(Eigen::Vector2d(x, y));
      EXPECT_NEAR(e.value, raw(x, y) - raw(0.0, 0.0), 1e-14);
      const double h = 1e-4;
      const double hxx = (raw(x + h, y) - 2 * raw(x, y) + raw(x - h, y)) / (h * h);
      const double hxy =
          (raw(x + h, y + h) - raw(x + h, y - h) - raw(x - h, y + h) + raw(x - h, y - h)) /
          (4 * h * h);
      EXPECT_NEAR(e.hessian(0, 0), hxx, 1e-6);
      EXPECT_NEAR(e.hessian(0, 1), hxy, 1e-6);
      EXPECT_EQ(e.hessian(0, 1), e.hessian(1, 0));
    }
  }
}

TEST(ValueFunctionApprox, GradientMatchesCentralDifferences) {
  std::mt19937 rng(22);
  std::uniform_real_distribution<double> u(-1.0, 1.0), zs(-3.0, 3.0);
  const int d = 10;
  const Rectangle dom{-3.0, 3.0, -3.0, 3.0};
  const ValueFunctionApprox V(LegendreBasis(d, dom),
                              Eigen::MatrixXd::NullaryExpr(d, d, [&] { return u(rng); }));
  const double h = 1e-6;
  for (int k = 0; k < 100; ++k) {
    const Eigen::Vector2d z(zs(rng), zs(rng));
    const Eigen::Vector2d g = V.gradient(z);
    Eigen::Vector2d fd;
    for (int c = 0; c < 2; ++c) {
      Eigen::Vector2d e = Eigen::Vector2d::Zero();
      e(c) = h;
      fd(c) = (V.value(z + e) - V.value(z - e)) / (2 * h);
    }
    EXPECT_LT((g - fd).norm(), 1e-7 * (1 + g.norm())) << k;
  }
}

TEST(ValueFunctionApprox, ValueVanishesAtOrigin) {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const ValueFunctionApprox V(LegendreBasis(6, Rectangle{-2.0, 2.0, -1.0, 3.0}),
                              Eigen::MatrixXd::NullaryExpr(6, 6, [&] { return u(rng); }));
  EXPECT_EQ(V.value(Eigen::Vector2d::Zero()), 0.0);
  EXPECT_FALSE(V.is_anchored());
}

TEST(ValueFunctionApprox, AnchoredCopyHasZeroGradientAtOrigin) {
  std::mt19937 rng(24);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const ValueFunctionApprox V(LegendreBasis(6, Rectangle{-2.0, 2.0, -1.0, 3.0}),
                              Eigen::MatrixXd::NullaryExpr(6, 6, [&] { return u(rng); }));
  const ValueFunctionApprox W = V.anchored();
  EXPECT_TRUE(W.is_anchored());
  EXPECT_EQ(W.value(Eigen::Vector2d::Zero()), 0.0);
  EXPECT_EQ(W.gradient(Eigen::Vector2d::Zero()), Eigen::Vector2d::Zero());
  const Eigen::Vector2d g0 = V.gradient(Eigen::Vector2d::Zero());
  const Eigen::Vector2d z(0.7, -0.4);
  EXPECT_NEAR(W.value(z), V.value(z) - g0.dot(z), 1e-13);
  EXPECT_LT((W.eval(z).hessian - V.eval(z).hessian).norm(), 1e-15);
  EXPECT_EQ(W.anchored().gradient(z), W.gradient(z));
}

TEST(ValueFunctionApprox, ExtrapolationFlag) {
  const ValueFunctionApprox V(LegendreBasis(3, unit_box), Eigen::MatrixXd::Zero(3, 3));
  EXPECT_FALSE(V.eval(Eigen::Vector2d(1.0, -1.0)).extrapolated);
  EXPECT_TRUE(V.eval(Eigen::Vector2d(1.01, 0.0)).extrapolated);
}

TEST(ValueFunctionApprox, WrongCoefficientShapeThrows) {
  EXPECT_THROW(ValueFunctionApprox(LegendreBasis(3, unit_box), Eigen::MatrixXd::Zero(2, 3)),
               ConfigError);
}

TEST(ValueFunctionApprox, ActiveCoefficientRoundTrip) {
  std::mt19937 rng(25);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const LegendreBasis basis(5, Rectangle{-2.0, 2.0, -2.0, 2.0});
  const Eigen::VectorXd c = Eigen::VectorXd::NullaryExpr(basis.active_size(), [&] { return u(rng); });
  const ValueFunctionApprox V = ValueFunctionApprox::from_active(basis, c);
  EXPECT_EQ(V.active_coefficients(), c);
  EXPECT_EQ(V.alpha()(1, 3), c(active_index(1, 3, 5)));
}

TEST(ValueFunctionApprox, CsvRoundTripIsBitExact) {
  std::mt19937 rng(26);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const ValueFunctionApprox V(LegendreBasis(7, Rectangle{-1.8, 1.8, -1.5, 2.25}),
                              Eigen::MatrixXd::NullaryExpr(7, 7, [&] { return u(rng); }));
  std::stringstream ss;
  V.write_csv(ss);
  const ValueFunctionApprox W = ValueFunctionApprox::read_csv(ss);
  EXPECT_EQ(W.basis().degree, 7);
  EXPECT_EQ(W.basis().domain.y_hi, 2.25);
  EXPECT_EQ(W.alpha(), V.alpha());
  EXPECT_EQ(W.value(Eigen::Vector2d(0.3, 0.9)), V.value(Eigen::Vector2d(0.3, 0.9)));
}

TEST(ValueFunctionApprox, MalformedCsvIsConfigError) {
  std::stringstream bad("d,x_lo,x_hi,y_lo,y_hi\n2,-1,1,-1,1\n0,1\n");
  EXPECT_THROW(ValueFunctionApprox::read_csv(bad), ConfigError);
  std::stringstream garbage("hello\n");
  EXPECT_THROW(ValueFunctionApprox::read_csv(garbage), ConfigError);
}

TEST(Project, QuadraticRecovered) {
  const LegendreBasis basis(5, Rectangle{-3.0, 3.0, -3.0, 3.0});
  const ValueFunctionApprox V = project(
      basis, [](const Vec& z) { return 0.5 * z.squaredNorm(); }, gauss_rule(12, basis.domain));
  const VfaEval e = V.eval(Eigen::Vector2d(1.0, 2.0));
  EXPECT_NEAR(e.value, 2.5, 1e-12);
  EXPECT_LT((e.gradient - Eigen::Vector2d(1.0, 2.0)).norm(), 1e-12);
  EXPECT_LT((e.hessian - Eigen::Matrix2d::Identity()).norm(), 1e-12);
}

TEST(Project, ReproducesTensorPolynomialsBelowDegree) {
  const int d = 6;
  const LegendreBasis basis(d, Rectangle{-2.0, 1.0, -1.5, 2.5});
  const QuadratureRule q = gauss_rule(2 * (d + 1), basis.domain);
  auto g = [](const Vec& z) {
    return 0.3 * z(0) - 1.2 * z(1) + 0.1 * z(0) * z(0) * z(1) -
           0.25 * std::pow(z(0) / 2.0, 5) * std::pow(z(1) / 2.5, 4) + 0.7;
  };
  const ValueFunctionApprox V = project(basis, g, q);
  for (double x = -2.0; x <= 1.0; x += 0.5) {
    for (double y = -1.5; y <= 2.5; y += 0.5) {
      EXPECT_NEAR(V.value(Eigen::Vector2d(x, y)), g(Eigen::Vector2d(x, y)) - 0.7, 1e-12);
    }
  }
}
