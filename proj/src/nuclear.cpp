#include "dfatoms/nuclear.hpp"

#include "dfatoms/error.hpp"

namespace dfatoms {

void NuclearModel::validate() const {
  if (!(charge > 0.0)) {
    fail(ErrorCode::invalid_argument, "nucleus: charge Z must be positive");
  }
  if (shape == NuclearShape::uniform_sphere && !(radius > 0.0)) {
    fail(ErrorCode::invalid_argument, "nucleus: uniform_sphere needs a positive radius");
  }
}

double NuclearModel::potential(double r) const {
  if (shape == NuclearShape::uniform_sphere && r <= radius) {
    const double x = r / radius;
    return -0.5 * charge / radius * (3.0 - x * x);
  }
  return -charge / r;
}

NuclearModel NuclearModel::with_charge(double z) const {
  NuclearModel copy = *this;
  copy.charge = z;
  return copy;
}

RadialPotential RadialPotential::zero(const RadialGrid& grid) {
  const auto m = static_cast<Eigen::Index>(grid.size());
  return {Vector::Zero(m), Vector::Zero(m)};
}

RadialPotential nuclear_potential(const NuclearModel& model, const RadialGrid& grid) {
  model.validate();
  RadialPotential v = RadialPotential::zero(grid);
  for (Eigen::Index i = 0; i < v.nodes.size(); ++i) {
    v.nodes[i] = model.potential(grid.nodes()[i]);
    v.midpoints[i] = model.potential(grid.midpoints()[i]);
  }
  return v;
}

}  // namespace dfatoms
