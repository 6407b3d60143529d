#pragma once

#include "pasctl/models.hpp"

namespace pasctl {

/// Solves A X = B by LU with partial pivoting. Throws SingularMatrix when a
/// pivot falls below 1e-14 * ||A||.
Mat solve_linear(const Mat& A, const Mat& B);
Vec solve_linear(const Mat& A, const Vec& b);

struct SymEig {
  Vec values;   // ascending
  Mat vectors;  // columns are orthonormal eigenvectors
};

/// Cyclic Jacobi eigensolver for symmetric matrices. The input is
/// symmetrized before iterating.
SymEig sym_eig(const Mat& S);

/// Solves A^T X + X A + W = 0 for symmetric X via Kronecker vectorization.
/// Throws NotHurwitz when A has an eigenvalue with nonnegative real part.
Mat solve_lyapunov(const Mat& A, const Mat& W);

/// Largest real part of the eigenvalues of a general square matrix.
double spectral_abscissa(const Mat& A);

struct CareSolution {
  Mat P;
  /// ||A^T P + P A - P B B^T P + C^T C||_F
  double residual_norm = 0.0;
  /// max Re eig(A - B B^T P)
  double closed_loop_spectral_abscissa = 0.0;
};

/// Stabilizing solution of A^T P + P A - P B B^T P + C^T C = 0.
///
/// Matrix-sign iteration on the Hamiltonian with determinant scaling, then
/// one Newton-Kleinman refinement. Throws NoStabilizingSolution.
CareSolution solve_care(const Mat& A, const Mat& B, const Mat& C);

}  // namespace pasctl
