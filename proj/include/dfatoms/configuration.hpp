#pragma once

#include <memory>
#include <vector>

#include "dfatoms/grid.hpp"
#include "dfatoms/nuclear.hpp"
#include "dfatoms/types.hpp"

namespace dfatoms {

enum class Model { dirac, schrodinger };

/// Occupied radial orbital.  `channel` is kappa for Dirac shells and l for
/// Schrodinger shells.  The state is stored quadrature-scaled (see
/// ChannelOperator), so its Euclidean norm is the L2 norm of (P, Q).
struct Shell {
  int n = 1;
  int channel = -1;
  double occupation = 2.0;
  Vector state;
  double energy = 0.0;  // eigenvalue, unshifted (Dirac: inside (0, c^2))

  /// Large and small components as samples on the nodes and midpoints.
  Vector large(const RadialGrid& grid) const;
  Vector small(const RadialGrid& grid) const;
};

/// Angular momentum l of a channel in the given model.
int channel_l(Model model, int channel);
/// Full closed-shell occupation 2j+1 (Dirac) or 2(2l+1) (Schrodinger).
double closed_shell_occupation(Model model, int channel);
/// Position of shell n among the bound levels of its channel: n - l - 1.
int level_index(Model model, int channel, int n);

struct ElectronicConfiguration {
  Model model = Model::dirac;
  NuclearModel nuclear;
  double speed_of_light = kSpeedOfLight;
  std::shared_ptr<const RadialGrid> grid;
  std::vector<Shell> shells;

  double electron_count() const;
  bool relativistic() const { return model == Model::dirac; }
  /// A lone electron in a j = 1/2 (or s) orbital: its exchange with itself is
  /// the full k = 0 term, so direct and exchange cancel.
  bool single_electron() const;
  Eigen::Index state_dimension() const;
  /// Largest deviation of the per-channel Gram matrices from the identity.
  double gram_error() const;
  /// Rejects occupations that are neither closed shells nor a lone electron.
  void validate() const;
};

/// Radial one-body density matrix of one channel in compact spectral form:
/// gamma = sum_j weights_j v_j v_j^T with orthonormal v_j.  The weights
/// include the angular degeneracy (a closed shell contributes 2j+1).
struct ChannelDensity {
  int channel = 0;
  Matrix vectors;
  Vector weights;
};

/// The electron density entering the mean field, grouped by channel.
/// Linear in gamma, so SCF mixing acts on it directly.
struct DensityState {
  Model model = Model::dirac;
  bool single_electron = false;
  std::vector<ChannelDensity> channels;

  static DensityState from(const ElectronicConfiguration& psi);
  /// theta * a + (1 - theta) * b, recompressed; weights below
  /// `cutoff * max weight` are dropped.
  static DensityState mix(const DensityState& a, const DensityState& b, double theta, double cutoff = 1e-13);
  double trace() const;
};

}  // namespace dfatoms
