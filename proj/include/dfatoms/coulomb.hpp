#pragma once

#include <memory>

#include "dfatoms/grid.hpp"
#include "dfatoms/types.hpp"

namespace dfatoms {

/// Multipole-k Coulomb potential operator on node samples:
///   U_i = Y^k(f; r_i) / r_i = \int f(s) r_<^k / r_>^{k+1} ds.
///
/// The integral is the trapezoidal rule in t = ln s plus Euler-Maclaurin
/// corrections for the derivative jumps of the kernel at s = r (orders h^2 and
/// h^4), which leaves an O(h^6) error.  Every term is built so that the
/// quadrature-weighted form W*Omega is exactly symmetric; energies computed
/// with it are therefore exact quadratic forms whose gradients are the
/// potentials the mean-field operators use.
class CoulombKernel {
 public:
  CoulombKernel(std::shared_ptr<const RadialGrid> grid, int k);

  int order() const { return k_; }
  const RadialGrid& grid() const { return *grid_; }

  /// U = Omega f in O(M).
  Vector potential(const Vector& f) const;
  /// Symmetric bilinear form sum_i w_i g_i (Omega f)_i.
  double pair_energy(const Vector& f, const Vector& g) const;
  /// Dense W*Omega (M x M, symmetric).
  Matrix weighted_matrix() const;

 private:
  std::shared_ptr<const RadialGrid> grid_;
  int k_;
  double diag_coeff_;     // h^2 and h^4 kink terms proportional to f_i
  double stencil_coeff_;  // h^4 term proportional to (1/r) d/dt (r df/dt)
};

/// Screening function Y^k(f; r) = r \int f(s) r_<^k / r_>^{k+1} ds on the nodes.
Vector slater_y(int k, const Vector& f, const RadialGrid& grid);

/// Lazily built kernels for k = 0..k_max sharing one grid.
class KernelCache {
 public:
  explicit KernelCache(std::shared_ptr<const RadialGrid> grid) : grid_(std::move(grid)) {}
  std::shared_ptr<const CoulombKernel> get(int k);
  const std::shared_ptr<const RadialGrid>& grid() const { return grid_; }

 private:
  std::shared_ptr<const RadialGrid> grid_;
  std::vector<std::shared_ptr<const CoulombKernel>> kernels_;
};

}  // namespace dfatoms
