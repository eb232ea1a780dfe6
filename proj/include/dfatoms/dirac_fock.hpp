#pragma once

#include <memory>

#include "dfatoms/channel.hpp"
#include "dfatoms/configuration.hpp"
#include "dfatoms/coulomb.hpp"

namespace dfatoms {

struct EnergyBreakdown {
  double total = 0.0;           // E_c, rest mass included
  double shifted = 0.0;         // E_c - N c^2, computed without cancellation
  double one_body = 0.0;
  double direct = 0.0;
  double exchange = 0.0;
  double eigenvalue_sum = 0.0;  // sum_a w_a eps_a (unshifted)
  double eigenvalue_sum_shifted = 0.0;

  /// |E - (sum w eps - (direct - exchange))|, in the shifted frame.
  double double_counting_defect() const;
};

/// Multipole weight Lambda^k between channels a and b in the given model.
/// Relativistic: 3j(j_a k j_b; 1/2 0 -1/2)^2; nonrelativistic:
/// (1/2) 3j(l_a k l_b; 0 0 0)^2 (spin averaged).  A lone electron exchanges
/// with itself through k = 0 with weight 1.
double exchange_weight(Model model, bool single_electron, int channel_a, int channel_b, int k);
int max_multipole(Model model, int channel_a, int channel_b);

/// Channels the mean-field builder accepts.
bool supported_channel(Model model, int channel);

/// Assembles bare and mean-field channel operators for one atom and grid.
class MeanFieldBuilder {
 public:
  MeanFieldBuilder(Model model, std::shared_ptr<const RadialGrid> grid, NuclearModel nuclear, double c);
  explicit MeanFieldBuilder(const ElectronicConfiguration& psi);

  Model model() const { return model_; }
  double speed_of_light() const { return c_; }
  const std::shared_ptr<const RadialGrid>& grid() const { return grid_; }
  const RadialPotential& nuclear() const { return nuclear_; }

  ChannelOperator bare(int channel) const;
  /// Bare operator plus direct potential and exchange of the density.
  ChannelOperator build(const DensityState& density, int channel) const;
  /// Node samples of the Hartree potential Y^0(D; r)/r.
  Vector direct_potential(const DensityState& density) const;
  /// Lumped node density D_i (integrates to the trace with node weights).
  Vector node_density(const DensityState& density) const;

  EnergyBreakdown energy(const ElectronicConfiguration& psi) const;
  /// Same functional on a density in spectral form (fractional weights
  /// allowed); eigenvalue sums are left at zero.
  EnergyBreakdown density_energy(const DensityState& density) const;
  std::shared_ptr<const CoulombKernel> kernel(int k) const { return kernels_.get(k); }

 private:
  Model model_;
  std::shared_ptr<const RadialGrid> grid_;
  NuclearModel nuclear_model_;
  double c_;
  RadialPotential nuclear_;
  mutable KernelCache kernels_;
};

/// D(r) = sum_a w_a (P_a^2 + Q_a^2), as lumped node samples.
Vector radial_density(const ElectronicConfiguration& psi);

ChannelOperator mean_field_matrix(const ElectronicConfiguration& psi, int channel);

EnergyBreakdown df_energy(const ElectronicConfiguration& psi);

}  // namespace dfatoms
