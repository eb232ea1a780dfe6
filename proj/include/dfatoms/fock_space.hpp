#pragma once

#include <string>
#include <vector>

#include "dfatoms/configuration.hpp"
#include "dfatoms/scf.hpp"
#include "dfatoms/variational.hpp"

namespace dfatoms {

/// One-body density matrix constrained by a positive projector per channel.
/// Blocks are kept in spectral form; a weight counts electrons, so a full
/// radial orbital carries 2j+1 (or 1 for a lone electron).
struct DensityMatrix {
  DensityState density;
  ProjectorMap projectors;

  double trace() const { return density.trace(); }
};

/// Occupation per magnetic substate of a weight in the given channel.
double occupation_number(const DensityState& density, int channel, double weight);

struct ConstraintReport {
  double orthonormality = 0.0;  // spectral vectors; the blocks are symmetric by construction
  double positive_min = 0.0, positive_max = 0.0;  // spectrum of P+ gamma P+ (per substate)
  double negative_min = 0.0, negative_max = 0.0;  // spectrum of (1-P+) gamma (1-P+)
  double off_diagonal = 0.0;                      // ||P+ gamma (1-P+)||_F
  double trace = 0.0;
  std::string violated;  // empty when every invariant holds

  bool ok() const { return violated.empty(); }
};

/// The four invariants of the constraint set with N = `electrons`.
ConstraintReport check_constraints(const DensityMatrix& gamma, double electrons);

/// F_c(gamma) = tr((H_c - c^2) gamma) + direct - exchange.  Throws
/// constraint_violation naming the violated invariant.
double fc_energy(const DensityMatrix& gamma, const ProblemSpec& spec);

/// P+ = chi_[0,inf) of the mean field of psi, per occupied channel.
ProjectorMap mean_field_projectors(const ElectronicConfiguration& psi);

struct FockControls {
  double energy_tolerance = 1e-12;      // relative, on the ODA slope
  double idempotency_tolerance = 1e-10;
  int max_iter = 300;

  bool operator==(const FockControls&) const = default;
};

struct NoPairCertificate {
  double idempotency = 0.0;     // max |n^2 - n| over the occupation numbers
  double rank = 0.0;            // electrons in orbitals with n > 1/2
  double trace = 0.0;
  double negative_block = 0.0;  // largest |eigenvalue| of (1-P+) gamma (1-P+)
  double binding_gain = 0.0;    // F after removing one electron from the top level, minus F
  bool no_pair = false;
  std::string reason;           // why certification failed
};

struct FixedProjectorResult {
  DensityMatrix gamma;
  ElectronicConfiguration orbitals;  // Aufbau orbitals of the final mean field
  double energy = 0.0;               // F_c(gamma)
  std::vector<double> energy_history;
  std::vector<double> damping;       // optimal-damping step per iteration
  int iterations = 0;
  bool converged = false;
  bool monotone = true;  // F nonincreasing after the third iterate
  NoPairCertificate certificate;
};

/// min F_c over the constraint set at fixed P+: Aufbau on the compressed mean
/// field, combined with the previous iterate by optimal damping (F is
/// quadratic along the segment, so every step lowers it).  `start` seeds the
/// orbitals; defaults to the screened guess.
FixedProjectorResult minimize_fc_fixed_projector(const ProblemSpec& spec, const ProjectorMap& projectors,
                                                 const FockControls& controls = {},
                                                 const ElectronicConfiguration* start = nullptr);

struct ProjectorIterationControls {
  double distance_tolerance = 1e-8;
  int max_iter = 60;
  int oscillation_window = 10;
  FockControls inner;
  // lets a configuration with one electron beyond closed shells through, to
  // watch the iteration fail to certify
  bool open_shell_experiment = false;

  bool operator==(const ProjectorIterationControls&) const = default;
};

struct ProjectorIterationResult {
  std::vector<double> distances;  // projector change per update
  std::vector<double> energies;   // F_c after each update
  int updates = 0;
  bool converged = false;
  bool oscillating = false;
  double certificate_distance = 1.0;  // final P+ vs chi_(0,inf) of the final mean field
  bool certified = false;
  ProjectorMap projectors;
  FixedProjectorResult last;
};

/// Psi -> P+ = chi_[0,inf)(H_Psi) -> argmin F_c at P+ -> Psi, until P+ stops
/// moving.
ProjectorIterationResult maxmin_projector_iteration(const ProblemSpec& spec,
                                                    const ProjectorIterationControls& controls = {},
                                                    const ElectronicConfiguration* start = nullptr);

}  // namespace dfatoms
