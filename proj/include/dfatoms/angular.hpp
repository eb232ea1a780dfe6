#pragma once

namespace dfatoms {

/// Wigner 3j symbol (j1 j2 j3; m1 m2 m3) with every argument passed as twice
/// its value, so half-integers stay exact.  Racah's single-sum formula.
double wigner_3j(int two_j1, int two_j2, int two_j3, int two_m1, int two_m2, int two_m3);

int kappa_to_l(int kappa);
int kappa_to_two_j(int kappa);

/// Multipole weight of the closed-shell exchange between shells a and b.
struct AngularCoefficient {
  int two_ja = 0;
  int two_jb = 0;
  int k = 0;
  double value = 0.0;
};

/// (3j(j_a k j_b; 1/2 0 -1/2))^2, zero unless the triangle and the parity rule
/// l_a + l_b + k even hold.  Throws when j != l +- 1/2.
AngularCoefficient angular_weight(int two_ja, int two_jb, int la, int lb, int k);

/// Convenience overload on relativistic channels.
double relativistic_exchange_weight(int kappa_a, int kappa_b, int k);

/// (3j(l_a k l_b; 0 0 0))^2 for nonrelativistic shells.
double nonrelativistic_exchange_weight(int la, int lb, int k);

}  // namespace dfatoms
