#pragma once

#include <cstddef>

#include "dfatoms/types.hpp"

namespace dfatoms {

enum class GridKind { exponential };

/// Logarithmic radial mesh r_i = r_min (r_max/r_min)^{i/(M-1)}.
///
/// The large component of a Dirac spinor lives on the nodes and the small
/// component on the geometric midpoints r_{i+1/2} = r_i e^{h/2}, h being the
/// uniform step in t = ln r.  Node weights are the trapezoidal rule in t with
/// end corrections chosen so that constants integrate exactly over
/// [r_min, r_max]; smooth integrands that decay at both ends are integrated
/// with spectral accuracy.
class RadialGrid {
 public:
  RadialGrid(GridKind kind, double r_min, double r_max, std::size_t size);

  GridKind kind() const { return kind_; }
  std::size_t size() const { return static_cast<std::size_t>(nodes_.size()); }
  double r_min() const { return nodes_[0]; }
  double r_max() const { return nodes_[nodes_.size() - 1]; }
  double step() const { return step_; }

  const Vector& nodes() const { return nodes_; }
  const Vector& weights() const { return weights_; }
  const Vector& midpoints() const { return midpoints_; }
  const Vector& midpoint_weights() const { return midpoint_weights_; }

  /// Node quadrature of samples f(r_i).
  double integrate(const Vector& f) const { return weights_.dot(f); }

 private:
  GridKind kind_;
  double step_;
  Vector nodes_;
  Vector weights_;
  Vector midpoints_;
  Vector midpoint_weights_;
};

/// Rejects r_min <= 0, r_max <= r_min and fewer than 16 nodes.
RadialGrid build_grid(GridKind kind, double r_min, double r_max, std::size_t size);

/// Default mesh for nuclear charge Z: r_min = 1e-6/Z, r_max = 40, M = 2000.
struct GridSpec {
  double r_min = 0.0;  // 0 selects 1e-6/Z
  double r_max = 40.0;
  std::size_t size = 2000;

  RadialGrid build(double nuclear_charge) const;
  bool operator==(const GridSpec&) const = default;
};

}  // namespace dfatoms
