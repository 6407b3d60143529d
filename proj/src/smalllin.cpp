#include "pasctl/smalllin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>

#include "pasctl/errors.hpp"

namespace pasctl {

namespace {

Eigen::PartialPivLU<Mat> checked_lu(const Mat& A) {
  if (A.rows() != A.cols()) throw ConfigError("solve_linear: matrix must be square");
  const double scale = A.cwiseAbs().rowwise().sum().maxCoeff();
  Eigen::PartialPivLU<Mat> lu(A);
  const double min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (!(scale > 0.0) || min_pivot < 1e-14 * scale) {
    throw SingularMatrix("solve_linear: matrix is singular to working precision");
  }
  return lu;
}

}  // namespace

Mat solve_linear(const Mat& A, const Mat& B) {
  if (B.rows() != A.rows()) throw ConfigError("solve_linear: right-hand side has wrong size");
  return checked_lu(A).solve(B);
}

Vec solve_linear(const Mat& A, const Vec& b) {
  if (b.size() != A.rows()) throw ConfigError("solve_linear: right-hand side has wrong size");
  return checked_lu(A).solve(b);
}

SymEig sym_eig(const Mat& S_in) {
  if (S_in.rows() != S_in.cols()) throw ConfigError("sym_eig: matrix must be square");
  const Eigen::Index n = S_in.rows();
  Mat S = 0.5 * (S_in + S_in.transpose());
  Mat V = Mat::Identity(n, n);
  const double total = S.norm();

  for (int sweep = 0; sweep < 30; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += 2.0 * S(p, q) * S(p, q);
    if (std::sqrt(off) <= 1e-14 * total) break;

    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = S(p, q);
        if (apq == 0.0) continue;
        // Rotation angle that annihilates S(p, q).
        const double theta = (S(q, q) - S(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double skp = S(k, p);
          const double skq = S(k, q);
          S(k, p) = c * skp - s * skq;
          S(k, q) = s * skp + c * skq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double spk = S(p, k);
          const double sqk = S(q, k);
          S(p, k) = c * spk - s * sqk;
          S(q, k) = s * spk + c * sqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = V(k, p);
          const double vkq = V(k, q);
          V(k, p) = c * vkp - s * vkq;
          V(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return S(a, a) < S(b, b); });
  SymEig out{Vec(n), Mat(n, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values(k) = S(order[k], order[k]);
    out.vectors.col(k) = V.col(order[k]);
  }
  return out;
}

double spectral_abscissa(const Mat& A) {
  if (A.rows() != A.cols()) throw ConfigError("spectral_abscissa: matrix must be square");
  if (A.rows() == 0) return -std::numeric_limits<double>::infinity();
  Eigen::EigenSolver<Mat> es(A, false);
  return es.eigenvalues().real().maxCoeff();
}

Mat solve_lyapunov(const Mat& A, const Mat& W) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || W.rows() != n || W.cols() != n) {
    throw ConfigError("solve_lyapunov: dimension mismatch");
  }
  if (spectral_abscissa(A) >= 0.0) {
    throw NotHurwitz("solve_lyapunov: A is not Hurwitz");
  }
  const Mat I = Mat::Identity(n, n);
  // vec(A^T X + X A) = (I kron A^T + A^T kron I) vec(X), column-major vec.
  Mat K = Mat::Zero(n * n, n * n);
  const Mat At = A.transpose();
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      K.block(j * n, i * n, n, n) += I(j, i) * At;
      K.block(j * n, i * n, n, n) += At(j, i) * I;
    }
  }
  const Vec rhs = -Eigen::Map<const Vec>(Mat(W).data(), n * n);
  Vec x;
  try {
    x = solve_linear(K, rhs);
  } catch (const SingularMatrix&) {
    throw NotHurwitz("solve_lyapunov: Lyapunov operator is singular");
  }
  Mat X = Eigen::Map<const Mat>(x.data(), n, n);
  return 0.5 * (X + X.transpose());
}

CareSolution solve_care(const Mat& A, const Mat& B, const Mat& C) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || B.rows() != n || C.cols() != n) {
    throw ConfigError("solve_care: dimension mismatch");
  }
  const Mat G = B * B.transpose();
  const Mat Qc = C.transpose() * C;

  Mat Z(2 * n, 2 * n);
  Z << A, -G, -Qc, -A.transpose();

  bool converged = false;
  for (int it = 0; it < 100; ++it) {
    Eigen::PartialPivLU<Mat> lu(Z);
    const Vec diag = lu.matrixLU().diagonal().cwiseAbs();
    if (diag.minCoeff() == 0.0) break;
    // |det Z|^(1/2n), computed in log space.
    const double c = std::exp(diag.array().log().sum() / static_cast<double>(2 * n));
    const Mat Znext = 0.5 * (Z / c + c * lu.inverse());
    const double change = (Znext - Z).cwiseAbs().colwise().sum().maxCoeff();
    const double size = Znext.cwiseAbs().colwise().sum().maxCoeff();
    Z = Znext;
    if (!std::isfinite(size)) break;
    if (change <= 1e-13 * size) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw NoStabilizingSolution("solve_care: sign iteration did not converge in 100 steps");
  }

  // The stable invariant subspace [I; P] spans the null space of sign(H) + I.
  const Mat I = Mat::Identity(n, n);
  Mat lhs(2 * n, n), rhs(2 * n, n);
  lhs << Z.topRightCorner(n, n), Z.bottomRightCorner(n, n) + I;
  rhs << -(Z.topLeftCorner(n, n) + I), -Z.bottomLeftCorner(n, n);
  Mat P = lhs.colPivHouseholderQr().solve(rhs);
  P = 0.5 * (P + P.transpose());

  // Newton-Kleinman refinement, repeated while the residual keeps shrinking.
  auto residual = [&](const Mat& X) { return (A.transpose() * X + X * A - X * G * X + Qc).norm(); };
  double res = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 5; ++it) {
    Mat next;
    try {
      next = solve_lyapunov(A - G * P, Qc + P * G * P);
    } catch (const NotHurwitz&) {
      if (it == 0) {
        throw NoStabilizingSolution("solve_care: sign-iteration solution is not stabilizing");
      }
      break;
    }
    next = 0.5 * (next + next.transpose());
    const double r = residual(next);
    if (it > 0 && !(r < 0.5 * res)) break;
    P = next;
    res = r;
  }

  CareSolution out;
  out.P = P;
  out.residual_norm = (A.transpose() * P + P * A - P * G * P + Qc).norm();
  out.closed_loop_spectral_abscissa = spectral_abscissa(A - G * P);
  if (!(out.closed_loop_spectral_abscissa < 0.0)) {
    throw NoStabilizingSolution("solve_care: closed loop is not Hurwitz");
  }
  return out;
}

}  // namespace pasctl
