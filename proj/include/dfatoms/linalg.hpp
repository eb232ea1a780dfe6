#pragma once

#include "dfatoms/channel.hpp"
#include "dfatoms/types.hpp"

namespace dfatoms {

struct EigenSystem {
  Vector values;   // ascending
  Matrix vectors;  // columns, orthonormal
};

/// Full spectrum of a dense symmetric matrix (LAPACK divide and conquer).
EigenSystem symmetric_eigen(const Matrix& a);
/// Eigenpairs with eigenvalues in the half-open window (lo, hi].
EigenSystem symmetric_eigen_window(const Matrix& a, double lo, double hi);
/// Symmetric tridiagonal (diagonal d, off-diagonal e) restricted to (lo, hi].
EigenSystem tridiagonal_eigen_window(const Vector& d, const Vector& e, double lo, double hi);
EigenSystem tridiagonal_eigen(const Vector& d, const Vector& e);
/// Eigenpairs first..last (0-based, ascending) by bisection.
EigenSystem tridiagonal_eigen_range(const Vector& d, const Vector& e, Eigen::Index first, Eigen::Index last);
/// Number of eigenvalues below x (Sturm sequence).
Eigen::Index sturm_count(const Vector& d, const Vector& e, double x);
/// Solves (T - shift) y = rhs for tridiagonal T; nudges the shift if singular.
Vector tridiagonal_solve(const Vector& d, const Vector& e, double shift, const Vector& rhs);

/// Singular values (descending) of an upper bidiagonal matrix, to high
/// relative accuracy (implicit zero-shift QR).
Vector bidiagonal_singular_values(const Vector& diagonal, const Vector& upper);

enum class EigenMethod { automatic, dense, iterative };

struct ChannelSpectrum {
  Vector values;   // eigenvalues of the stored (shifted) operator, ascending
  Matrix vectors;  // block layout, quadrature-scaled, orthonormal
  double shift = 0.0;
};

/// Every eigenpair of the channel operator (dense).
ChannelSpectrum diagonalize_channel(const ChannelOperator& op);

/// Componentwise rounding bound on ||A x - theta x|| for the local part of
/// `op`.  On graded grids it is the smallest residual worth asking for.
double residual_rounding_floor(const ChannelOperator& op, const Vector& x, double theta);

/// The lowest `count` eigenpairs of the stored operator inside (lo, hi].
/// The iterative path is a Davidson solver preconditioned by the tridiagonal
/// local part, so it handles the exchange and rank-one terms matrix-free.
/// `guess` may hold previous eigenvectors (block layout) to warm start;
/// `tolerance` bounds the residual norm ||A x - theta x|| of each pair.
ChannelSpectrum lowest_in_window(const ChannelOperator& op, int count, double lo, double hi,
                                 const Matrix* guess = nullptr,
                                 EigenMethod method = EigenMethod::automatic, double tolerance = 1e-10);

/// Max-abs asymmetry relative to the max-abs entry.
double relative_asymmetry(const Matrix& a);

}  // namespace dfatoms
