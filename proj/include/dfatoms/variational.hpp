#pragma once

#include <map>
#include <vector>

#include "dfatoms/projector.hpp"
#include "dfatoms/scf.hpp"

namespace dfatoms {

using ProjectorMap = std::map<int, Projector>;

/// Complement value used when an operator is compressed to range(P+): the
/// shifted energy c^2 (2c^2 unshifted) lies above every bound window.
double parked_value(double c);

/// P+ per occupied channel of the spec from a free or file source.
ProjectorMap positive_projectors(const ProblemSpec& spec, ProjectorSource source, const ProjectorMap* file = nullptr);

struct ProjectedReport {
  SCFReport scf;
  ProjectorSource source = ProjectorSource::free;
  ProjectorMap projectors;             // final P+ per channel
  std::vector<double> range_residuals;  // ||(1 - P+) psi_k||
};

/// Projected Dirac-Fock equations P+ H P+ psi = lambda psi.  free and file
/// keep P+ fixed; mean_field recomputes P+ = chi_[0,inf)(H) of the current
/// mean field every iteration (dense, desk-scale grids).
ProjectedReport projected_scf(const ProblemSpec& spec, ProjectorSource source, const ScfControls& controls = {},
                              const ProjectorMap* file = nullptr);

struct MinMaxControls {
  // norms are taken in the preconditioned metric <g, (|A - theta| + 1)^{-1} g>
  double gradient_tolerance = 1e-6;  // outer
  double inner_tolerance = 1e-9;
  int max_outer = 400;
  int max_inner = 2000;
  std::size_t max_grid = 120;

  bool operator==(const MinMaxControls&) const = default;
};

struct MinMaxReport {
  double e_outer = 0.0;  // shifted, E - N c^2
  std::vector<double> inner_sup_values;  // final sup of every inner solve
  std::vector<double> outer_iterates;    // accepted outer values
  ProjectorSource projector_source = ProjectorSource::free;
  double e_scf = 0.0;  // scf_solve on the same grid, shifted
  double gap_to_scf = 0.0;
  double gradient_norm = 0.0;
  int inner_iterations = 0;  // summed
  bool inner_monotone = true;  // every inner ascent was nondecreasing
  bool converged = false;
};

/// E(P+) = inf over frames Phi in range(P+) of sup over frames in
/// range(P-) + span(Phi) of the orbital energy.  Frames are radial: one
/// column per shell of a channel.  The inner sup is a preconditioned
/// Riemannian ascent on the Stiefel manifold with QR retraction, the outer inf
/// a descent along the Danskin gradient.  mean_field takes P+ from the
/// converged SCF mean field on the same grid.
MinMaxReport maxmin_energy(const ProblemSpec& spec, ProjectorSource source, const MinMaxControls& controls = {},
                           const ProjectorMap* file = nullptr);

}  // namespace dfatoms
