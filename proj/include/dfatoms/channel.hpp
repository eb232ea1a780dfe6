#pragma once

#include <memory>
#include <vector>

#include "dfatoms/coulomb.hpp"
#include "dfatoms/grid.hpp"
#include "dfatoms/nuclear.hpp"
#include "dfatoms/types.hpp"

namespace dfatoms {

enum class OperatorKind { dirac, schrodinger, mean_field_dirac, mean_field_schrodinger };

bool is_relativistic(OperatorKind kind);

/// Discrete (d/dr + kappa/r) in quadrature-scaled coordinates: an upper
/// bidiagonal M x M map from large-component nodes to small-component
/// midpoints.  Written as r^{-kappa} d/dr r^{kappa} differenced across each
/// cell, so it is second order at r_{i+1/2}.
struct KineticFactor {
  Vector diagonal;  // B(i, i)
  Vector upper;     // B(i, i+1), last entry unused (zero)

  Vector apply(const Vector& p) const;
  Vector apply_transpose(const Vector& q) const;
  Matrix dense() const;
  /// B^T B and B B^T as (diagonal, off-diagonal) pairs.
  std::pair<Vector, Vector> normal_large() const;
  std::pair<Vector, Vector> normal_small() const;
};

KineticFactor kinetic_factor(const RadialGrid& grid, int kappa);

/// -coefficient * phi (x) Y^k(f(x, phi))/r with f the lumped pair density.
struct ExchangeTerm {
  double coefficient = 0.0;
  std::shared_ptr<const CoulombKernel> kernel;
  Vector orbital;  // quadrature-scaled, block layout
};

struct RankOneTerm {
  double coefficient = 0.0;
  Vector vector;
};

/// One angular channel of a radial one-body operator, stored as H - shift in
/// quadrature-scaled coordinates (so the matrix is symmetric and the grid
/// inner product becomes the Euclidean one).
///
/// Dirac kinds act on [p; q] (2M entries: large component on the nodes, then
/// small component on the midpoints) and carry shift = c^2; Schrodinger kinds
/// act on M node values with shift 0.  The local part (kinetic, nuclear,
/// direct) is symmetric tridiagonal in the natural ordering, which for Dirac
/// kinds interleaves p_0, q_0, p_1, q_1, ...  Exchange and rank-one terms are
/// applied matrix-free.
class ChannelOperator {
 public:
  ChannelOperator(OperatorKind kind, int channel, double speed_of_light, double shift,
                  std::shared_ptr<const RadialGrid> grid, Vector diagonal, Vector off_diagonal);

  OperatorKind kind() const { return kind_; }
  int channel() const { return channel_; }
  double speed_of_light() const { return c_; }
  double shift() const { return shift_; }
  const RadialGrid& grid() const { return *grid_; }
  const std::shared_ptr<const RadialGrid>& grid_ptr() const { return grid_; }
  bool relativistic() const { return is_relativistic(kind_); }
  Eigen::Index dimension() const { return diagonal_.size(); }

  const Vector& local_diagonal() const { return diagonal_; }
  const Vector& local_off_diagonal() const { return off_diagonal_; }
  const std::vector<ExchangeTerm>& exchange_terms() const { return exchange_; }
  /// Factored kinetic part of a Schrodinger kind (apply() uses B^T B / 2 + V); null for Dirac kinds.
  const KineticFactor* factored_kinetic() const { return potential_.size() > 0 ? &kinetic_ : nullptr; }
  const Vector& factored_potential() const { return potential_; }
  const std::vector<RankOneTerm>& rank_one_terms() const { return rank_one_; }

  /// Adds a node potential to both components (direct Coulomb term).
  void add_node_potential(const Vector& u, double scale = 1.0);
  void add_exchange(ExchangeTerm term);
  void add_rank_one(RankOneTerm term);
  void add_identity(double value);
  void set_kind(OperatorKind kind) { kind_ = kind; }
  /// Restricts the operator to range(U): x -> U U^T H U U^T x + alpha (1 - U U^T) x,
  /// with U orthonormal.  alpha parks the complement outside any window of interest.
  void compress(std::shared_ptr<const Matrix> basis, double complement_value);
  bool compressed() const { return static_cast<bool>(basis_); }
  double complement_value() const { return complement_value_; }
  const Matrix* compression_basis() const { return basis_.get(); }

  Vector apply(const Vector& x) const;
  Matrix dense() const;
  Matrix local_dense() const;

  /// Layout conversions between [p; q] and the interleaved tridiagonal order.
  Vector to_natural(const Vector& block) const;
  Vector to_block(const Vector& natural) const;

  /// Lumped node density of the pair (x, y): (x_p y_p + x_q y_q) / w.
  Vector pair_density(const Vector& x, const Vector& y) const;

 private:
  OperatorKind kind_;
  int channel_;
  double c_;
  double shift_;
  std::shared_ptr<const RadialGrid> grid_;
  Vector diagonal_;
  Vector off_diagonal_;
  std::vector<ExchangeTerm> exchange_;
  std::vector<RankOneTerm> rank_one_;
  std::shared_ptr<const Matrix> basis_;
  double complement_value_ = 0.0;
  // Schrodinger kinds keep B and V apart: on a fine grid the assembled
  // diagonal reaches ~1e17 near the origin and apply() would lose the
  // residual to cancellation.  Empty for Dirac kinds.
  KineticFactor kinetic_;
  Vector potential_;

  Vector apply_uncompressed(const Vector& x) const;

  friend ChannelOperator schrodinger_channel_matrix(std::shared_ptr<const RadialGrid> grid, int l,
                                                    const RadialPotential& v);
};

/// Lumped node density of a (possibly relativistic) scaled pair; used by the
/// Coulomb terms.  Small-component products are attributed to node i with
/// the midpoint weight, so node quadrature conserves charge exactly.
Vector lumped_pair_density(const RadialGrid& grid, bool relativistic, const Vector& x, const Vector& y);

/// Radial Dirac operator for channel kappa, shifted by c^2:
///   [[V_P, c B^T], [c B, V_Q - 2c^2]].
ChannelOperator dirac_channel_matrix(std::shared_ptr<const RadialGrid> grid, int kappa, double c,
                                     const RadialPotential& v);

/// -1/2 d^2/dr^2 + l(l+1)/(2 r^2) + V, discretised as (1/2) B^T B + V with
/// kappa = -l-1, which is the c -> infinity limit of the Dirac channel.
ChannelOperator schrodinger_channel_matrix(std::shared_ptr<const RadialGrid> grid, int l,
                                           const RadialPotential& v);

/// Conversions between quadrature-scaled states and radial samples.
Vector scale_large(const RadialGrid& grid, const Vector& p_samples);
Vector scale_small(const RadialGrid& grid, const Vector& q_samples);
Vector unscale_large(const RadialGrid& grid, const Vector& p_scaled);
Vector unscale_small(const RadialGrid& grid, const Vector& q_scaled);

}  // namespace dfatoms
