#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "dfatoms/configuration.hpp"
#include "dfatoms/dirac_fock.hpp"
#include "dfatoms/grid.hpp"
#include "dfatoms/linalg.hpp"
#include "dfatoms/nuclear.hpp"

namespace dfatoms {

struct ShellSpec {
  int n = 1;
  int channel = -1;  // kappa (Dirac) or l (Schrodinger)
  double occupation = 2.0;

  bool operator==(const ShellSpec&) const = default;
};

struct ProblemSpec {
  Model model = Model::dirac;
  NuclearModel nuclear;
  double speed_of_light = kSpeedOfLight;
  GridSpec grid;
  std::vector<ShellSpec> shells;

  double electron_count() const;
  /// Checks N < Z + 1, closed shells and supported channels.
  void validate() const;
};

enum class LambdaCheck { automatic, always, never };

struct ScfControls {
  double mixing = 0.5;
  double energy_tolerance = 1e-10;
  double residual_tolerance = 1e-8;
  int max_iter = 200;
  double level_shift = 0.0;
  EigenMethod method = EigenMethod::automatic;
  LambdaCheck lambda_check = LambdaCheck::automatic;

  bool operator==(const ScfControls&) const = default;
};

struct SCFReport {
  ElectronicConfiguration configuration;
  EnergyBreakdown energy;
  int iterations = 0;
  std::vector<double> energy_history;      // shifted energies E - N c^2
  std::vector<double> residual_history;    // max orbital residual per iteration
  std::vector<double> orbital_residuals;   // final ||(H - eps) psi|| per shell
  // rounding bound on each residual; an orbital counts as converged when its
  // residual is below max(residual_tolerance, floor)
  std::vector<double> residual_floors;
  std::vector<double> lambda_minus_residuals;  // empty when not evaluated
  bool converged = false;
};

/// Optional rewrite of each channel operator before it is diagonalised
/// (used by the projected equations).
using OperatorTransform = std::function<void(ChannelOperator&, const DensityState&)>;

/// Replaces every shell by the Aufbau eigenpair of its channel operator built
/// from `density` (then rewritten by `transform`); the current states warm
/// start the eigensolver.
void aufbau_fill(ElectronicConfiguration& psi, const MeanFieldBuilder& builder, const DensityState& density,
                 const OperatorTransform& transform, EigenMethod method, double tolerance);

struct OrbitalCheck {
  std::vector<double> residuals;
  std::vector<double> floors;
  double worst = 0.0;
  bool settled = true;  // every residual below max(tolerance, floor)
};

/// Residuals of the orbitals against the operators of their own density;
/// also refreshes the shell energies to the Rayleigh quotients.
OrbitalCheck check_orbitals(ElectronicConfiguration& psi, const MeanFieldBuilder& builder,
                            const OperatorTransform& transform, double tolerance);

/// Closed-shell Dirac-Fock (or Hartree-Fock, depending on spec.model) by
/// damped fixed-point iteration on the channel density matrices.
SCFReport scf_solve(const ProblemSpec& spec, const ScfControls& controls = {},
                    const OperatorTransform& transform = {});

/// Nonrelativistic Hartree-Fock; spec.model must be schrodinger.
SCFReport hf_scf(const ProblemSpec& spec, const ScfControls& controls = {});

/// Screened Coulomb orbitals for Z_eff = Z - (N-1)/2.
ElectronicConfiguration initial_guess(const ProblemSpec& spec, std::shared_ptr<const RadialGrid> grid);

/// Occupied orbitals from a channel's lowest in-window eigenpairs.
double orbital_residual(const ChannelOperator& op, const Vector& psi, double energy_shifted);

/// Energy window (shifted) searched for occupied levels.
std::pair<double, double> bound_window(Model model, double c);

}  // namespace dfatoms
