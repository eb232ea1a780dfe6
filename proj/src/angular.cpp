#include "dfatoms/angular.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "dfatoms/error.hpp"

namespace dfatoms {
namespace {

// n! for n <= 170 in long double; arguments here stay below 40.
long double factorial(int n) {
  static const auto table = [] {
    std::array<long double, 171> t{};
    t[0] = 1.0L;
    for (int i = 1; i < 171; ++i) t[i] = t[i - 1] * static_cast<long double>(i);
    return t;
  }();
  return table.at(static_cast<std::size_t>(n));
}

bool triangle(int a, int b, int c) {
  return c >= std::abs(a - b) && c <= a + b && (a + b + c) % 2 == 0;
}

}  // namespace

double wigner_3j(int two_j1, int two_j2, int two_j3, int two_m1, int two_m2, int two_m3) {
  if (two_m1 + two_m2 + two_m3 != 0) return 0.0;
  if (!triangle(two_j1, two_j2, two_j3)) return 0.0;
  if (std::abs(two_m1) > two_j1 || std::abs(two_m2) > two_j2 || std::abs(two_m3) > two_j3) return 0.0;
  if ((two_j1 + two_m1) % 2 != 0 || (two_j2 + two_m2) % 2 != 0 || (two_j3 + two_m3) % 2 != 0) return 0.0;

  const int j1 = two_j1, j2 = two_j2, j3 = two_j3, m1 = two_m1, m2 = two_m2;
  // All combinations below are even; halve once.
  const int a = (j1 + j2 - j3) / 2;
  const int b = (j1 - j2 + j3) / 2;
  const int c = (-j1 + j2 + j3) / 2;
  const int d = (j1 + j2 + j3) / 2 + 1;
  const long double delta = factorial(a) * factorial(b) * factorial(c) / factorial(d);
  const long double norm = factorial((j1 + m1) / 2) * factorial((j1 - m1) / 2) *
                           factorial((j2 + m2) / 2) * factorial((j2 - m2) / 2) *
                           factorial((j3 + two_m3) / 2) * factorial((j3 - two_m3) / 2);

  const int t_min = std::max({0, (j2 - j3 - m1) / 2, (j1 - j3 + m2) / 2});
  const int t_max = std::min({a, (j1 - m1) / 2, (j2 + m2) / 2});
  long double sum = 0.0L;
  for (int t = t_min; t <= t_max; ++t) {
    const long double den = factorial(t) * factorial((j3 - j2 + m1) / 2 + t) *
                            factorial((j3 - j1 - m2) / 2 + t) * factorial(a - t) *
                            factorial((j1 - m1) / 2 - t) * factorial((j2 + m2) / 2 - t);
    sum += ((t % 2 == 0) ? 1.0L : -1.0L) / den;
  }
  const int phase_exp = (j1 - j2 - two_m3) / 2;
  const long double phase = (((phase_exp % 2) + 2) % 2 == 0) ? 1.0L : -1.0L;
  return static_cast<double>(phase * std::sqrt(delta * norm) * sum);
}

int kappa_to_l(int kappa) { return kappa < 0 ? -kappa - 1 : kappa; }

int kappa_to_two_j(int kappa) { return 2 * std::abs(kappa) - 1; }

AngularCoefficient angular_weight(int two_ja, int two_jb, int la, int lb, int k) {
  auto consistent = [](int two_j, int l) {
    return l >= 0 && two_j > 0 && (two_j == 2 * l + 1 || two_j == 2 * l - 1);
  };
  if (!consistent(two_ja, la) || !consistent(two_jb, lb)) {
    std::ostringstream msg;
    msg << "angular_weight: inconsistent (j, l) pair (" << two_ja << "/2, " << la << ") or ("
        << two_jb << "/2, " << lb << ")";
    fail(ErrorCode::invalid_argument, msg.str());
  }
  if (k < 0) fail(ErrorCode::invalid_argument, "angular_weight: negative multipole order");
  AngularCoefficient out{two_ja, two_jb, k, 0.0};
  if ((la + lb + k) % 2 != 0) return out;
  const double w = wigner_3j(two_ja, 2 * k, two_jb, 1, 0, -1);
  out.value = w * w;
  return out;
}

double relativistic_exchange_weight(int kappa_a, int kappa_b, int k) {
  return angular_weight(kappa_to_two_j(kappa_a), kappa_to_two_j(kappa_b), kappa_to_l(kappa_a),
                        kappa_to_l(kappa_b), k)
      .value;
}

double nonrelativistic_exchange_weight(int la, int lb, int k) {
  const double w = wigner_3j(2 * la, 2 * k, 2 * lb, 0, 0, 0);
  return w * w;
}

}  // namespace dfatoms
