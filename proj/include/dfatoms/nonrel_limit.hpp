#pragma once

#include <string>
#include <vector>

#include "dfatoms/scf.hpp"

namespace dfatoms {

/// ||Q - (1/2c)(d/dr + kappa/r) P|| per shell, with the derivative taken by
/// the channel's kinetic factor.  With this code's sign convention the small
/// component of a positive-energy state is +(1/2c) B P to leading order.
std::vector<double> kinetic_balance_residual(const ElectronicConfiguration& psi);

/// ||Q|| per shell.
std::vector<double> small_component_norm(const ElectronicConfiguration& psi);

/// Nonrelativistic partner of a relativistic shell list: kappa = -1 -> l = 0,
/// kappa = 1 and -2 -> l = 1, merged per (n, l).  `pairing[i]` is the index
/// of the partner of shell i.
ProblemSpec nonrelativistic_partner(const ProblemSpec& dirac, std::vector<std::size_t>* pairing = nullptr);

struct LimitRow {
  double c = 0.0;
  double energy_shifted = 0.0;             // E_DF - N c^2
  std::vector<double> eigenvalues_shifted;  // eps_k - c^2
  std::vector<double> kb_residual;
  std::vector<double> small_norm;
  std::vector<double> large_distance;  // || P_k/||P_k|| - P_HF ||
  int iterations = 0;
};

struct LimitTable {
  std::vector<LimitRow> rows;  // ascending c
  double e_hf = 0.0;
  std::vector<double> hf_multipliers;  // per relativistic shell, through the pairing
  std::vector<int> shell_n;
  std::vector<int> shell_kappa;

  // log-log slopes against c (least squares over all rows)
  double energy_slope = 0.0;
  std::vector<double> multiplier_slopes;
  std::vector<double> kb_slopes;
  std::vector<double> small_norm_slopes;
  bool energy_monotone = false;
  bool large_monotone = false;

  std::string csv() const;
};

/// Runs scf_solve at c = c0 * factor for each factor and hf_scf once on the
/// same grid.  Any unconverged member run aborts with not_converged.
LimitTable limit_study(const ProblemSpec& dirac, const std::vector<double>& factors,
                       const ScfControls& controls = {});

/// Least-squares slope of log|y| against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace dfatoms
