#pragma once

#include "dfatoms/grid.hpp"
#include "dfatoms/types.hpp"

namespace dfatoms {

enum class NuclearShape { point, uniform_sphere };

struct NuclearModel {
  double charge = 1.0;
  NuclearShape shape = NuclearShape::point;
  double radius = 0.0;  // Bohr, uniform_sphere only

  void validate() const;
  double potential(double r) const;
  /// Same shape with a different total charge (screened initial guesses).
  NuclearModel with_charge(double z) const;
  bool operator==(const NuclearModel&) const = default;
};

/// Potential samples for the two spinor components: large component on the
/// grid nodes, small component on the staggered midpoints.
struct RadialPotential {
  Vector nodes;
  Vector midpoints;

  static RadialPotential zero(const RadialGrid& grid);
};

RadialPotential nuclear_potential(const NuclearModel& model, const RadialGrid& grid);

}  // namespace dfatoms
