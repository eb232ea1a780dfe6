#include "oracles/sto_hf.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

namespace oracle {

namespace {

// int int e^{-a r1} e^{-b r2} / r_> r1^2 r2^2 dr1 dr2
double coulomb_radial(double a, double b) {
  return 2.0 * (a * a + 3.0 * a * b + b * b) / (a * a * b * b * std::pow(a + b, 3));
}

}  // namespace

StoResult sto_hf_1s2(double z, int terms, double alpha, double beta) {
  const double four_pi = 4.0 * std::numbers::pi;
  Eigen::VectorXd zeta(terms), norm(terms);
  for (int i = 0; i < terms; ++i) {
    zeta[i] = alpha * std::pow(beta, i);
    norm[i] = std::sqrt(std::pow(zeta[i], 3) / std::numbers::pi);
  }
  Eigen::MatrixXd s(terms, terms), h(terms, terms);
  for (int i = 0; i < terms; ++i) {
    for (int j = 0; j < terms; ++j) {
      const double a = zeta[i] + zeta[j];
      const double nn = norm[i] * norm[j] * four_pi;
      s(i, j) = nn * 2.0 / std::pow(a, 3);
      // -1/2 lap e^{-zr} = (-zeta^2/2 + zeta/r) e^{-zr}
      const double kinetic = nn * (-0.5 * zeta[j] * zeta[j] * 2.0 / std::pow(a, 3) + zeta[j] / (a * a));
      const double nuclear = -z * nn / (a * a);
      h(i, j) = kinetic + nuclear;
    }
  }
  const int n = terms;
  std::vector<double> eri(static_cast<std::size_t>(n * n * n * n));
  auto at = [n](int i, int j, int k, int l) { return static_cast<std::size_t>(((i * n + j) * n + k) * n + l); };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          const double nn = norm[i] * norm[j] * norm[k] * norm[l] * four_pi * four_pi;
          eri[at(i, j, k, l)] = nn * coulomb_radial(zeta[i] + zeta[j], zeta[k] + zeta[l]);
        }

  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);  // density, two electrons
  StoResult out;
  out.alpha = alpha;
  out.beta = beta;
  double previous = 0.0;
  for (int iter = 0; iter < 500; ++iter) {
    Eigen::MatrixXd f = h;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) f(i, j) += d(k, l) * (eri[at(i, j, k, l)] - 0.5 * eri[at(i, k, j, l)]);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(f, s);
    const Eigen::VectorXd c = es.eigenvectors().col(0);
    const double energy = 0.5 * (d.cwiseProduct(h + f)).sum();
    const Eigen::MatrixXd next = 2.0 * c * c.transpose();
    d = iter == 0 ? next : Eigen::MatrixXd(0.5 * (d + next));
    out.orbital_energy = es.eigenvalues()[0];
    if (iter > 2 && std::abs(energy - previous) < 1e-14) {
      out.energy = energy;
      return out;
    }
    previous = energy;
    out.energy = energy;
  }
  return out;
}

StoResult sto_hf_1s2_optimized(double z, int terms) {
  double best_a = 0.0, best_b = 0.0, best = 1e300;
  for (double la = -3.0; la <= 1.0; la += 0.25) {
    for (double b = 1.4; b <= 4.0; b += 0.2) {
      const double e = sto_hf_1s2(z, terms, z * std::exp(la), b).energy;
      if (e < best) {
        best = e;
        best_a = z * std::exp(la);
        best_b = b;
      }
    }
  }
  auto golden = [&](auto energy_of, double lo, double hi) {
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double f1 = energy_of(x1), f2 = energy_of(x2);
    for (int i = 0; i < 60; ++i) {
      if (f1 < f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - g * (hi - lo);
        f1 = energy_of(x1);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + g * (hi - lo);
        f2 = energy_of(x2);
      }
    }
    return 0.5 * (lo + hi);
  };
  for (int round = 0; round < 6; ++round) {
    best_a = golden([&](double a) { return sto_hf_1s2(z, terms, a, best_b).energy; }, 0.6 * best_a, 1.6 * best_a);
    best_b = golden([&](double b) { return sto_hf_1s2(z, terms, best_a, b).energy; }, std::max(1.05, 0.8 * best_b),
                    1.25 * best_b);
  }
  return sto_hf_1s2(z, terms, best_a, best_b);
}

}  // namespace oracle
