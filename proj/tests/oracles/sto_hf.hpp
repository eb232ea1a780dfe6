#pragma once

// Roothaan Hartree-Fock for a two-electron 1s^2 atom in an even-tempered
// Slater basis, all integrals in closed form.  Shares nothing with the grid
// code.
#include <vector>

namespace oracle {

struct StoResult {
  double energy = 0.0;
  double orbital_energy = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
};

/// Basis exponents zeta_i = alpha * beta^i, i < terms.
StoResult sto_hf_1s2(double z, int terms, double alpha, double beta);

/// alpha and beta minimised by a coarse scan and coordinate golden sections.
StoResult sto_hf_1s2_optimized(double z, int terms);

}  // namespace oracle
