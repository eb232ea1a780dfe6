#pragma once

#include <memory>
#include <vector>

#include "dfatoms/channel.hpp"
#include "dfatoms/configuration.hpp"
#include "dfatoms/types.hpp"

namespace dfatoms {

enum class ProjectorSource { free, mean_field, file };

/// Orthogonal projector on a channel space, held as an orthonormal basis U of
/// its range (P = U U^T); the dense matrix is only formed on request.
struct Projector {
  int channel = 0;
  ProjectorSource source = ProjectorSource::free;
  std::shared_ptr<const Matrix> basis;

  Eigen::Index dimension() const { return basis->rows(); }
  Eigen::Index rank() const { return basis->cols(); }
  Matrix matrix() const;
  Vector apply(const Vector& x) const;
  /// Projector onto the orthogonal complement (dense QR, desk-scale only).
  Projector complement() const;
  double idempotency_residual() const;

  /// From a symmetric matrix with eigenvalues near 0 and 1.
  static Projector from_matrix(int channel, const Matrix& p, ProjectorSource source);
};

struct SpectralSplit {
  Projector positive;  // eigenvalues >= threshold
  Projector negative;  // eigenvalues < threshold
  Vector eigenvalues;  // unshifted, ascending
};

/// Splits the channel at an (unshifted) energy threshold.  Throws
/// threshold_collision when an eigenvalue lies within 1e-6 max(1, c^2).
SpectralSplit spectral_split(const ChannelOperator& op, double threshold,
                             ProjectorSource source = ProjectorSource::mean_field);
Projector spectral_projector(const ChannelOperator& op, double threshold,
                             ProjectorSource source = ProjectorSource::mean_field);

/// ||Lambda^- psi_k|| for each occupied orbital, Lambda^- the negative
/// spectral projector of its channel's mean-field operator.
std::vector<double> lambda_minus_residual(const ElectronicConfiguration& psi);

/// Positive-energy spectral projector of the free Dirac channel.
Projector free_positive_projector(int kappa, double c, std::shared_ptr<const RadialGrid> grid);

/// Smallest eps with ||W (P - Lambda^+) W^{-1}|| <= eps, W = (c^2 K + c^4)^{1/4}
/// with K the per-component kinetic operator of the channel.
double epsilon_closeness(const Projector& p, int kappa, double c, std::shared_ptr<const RadialGrid> grid);

/// Largest principal angle (sine) between the ranges of two projectors, or of
/// two sets of orthonormal columns.
double subspace_distance(const Matrix& a, const Matrix& b);

}  // namespace dfatoms
