#pragma once

#include <cmath>
#include <random>

#include "pasctl/smalllin.hpp"

namespace pasctl::testing {

inline Mat gaussian(std::mt19937& rng, int rows, int cols) {
  std::normal_distribution<double> g;
  return Mat::NullaryExpr(rows, cols, [&] { return g(rng); });
}

struct CareProblem {
  Mat A, B, C;
};

/// n uniform in 1..n_max, m uniform in ceil(n/2)..n, A Gaussian scaled by 1/sqrt(n).
inline CareProblem random_care_problem(std::mt19937& rng, int n_max = 8) {
  const int n = std::uniform_int_distribution<int>(1, n_max)(rng);
  const int m = std::uniform_int_distribution<int>((n + 1) / 2, n)(rng);
  CareProblem p;
  p.A = gaussian(rng, n, n) / std::sqrt(static_cast<double>(n));
  p.B = gaussian(rng, n, m);
  p.C = gaussian(rng, m, n);
  return p;
}

}  // namespace pasctl::testing
