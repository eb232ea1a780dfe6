#include "oracles/coulomb3d.hpp"

#include <cmath>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <boost/math/quadrature/gauss.hpp>

namespace oracle {

namespace {

using Gauss = boost::math::quadrature::gauss<double, 8>;

// int_{-1}^{1} dmu / |x - y| with mu = 1 - 2 s^2, panels refined towards the
// near-coincidence scale s* = |r1 - r2| / (2 sqrt(r1 r2))
double angular(double r1, double r2) {
  const double d2 = (r1 - r2) * (r1 - r2);
  const double q = 4.0 * r1 * r2;
  auto f = [&](double s) { return 4.0 * s / std::sqrt(d2 + q * s * s); };
  double edge = std::sqrt(d2 / q);
  if (edge <= 0.0) return Gauss::integrate(f, 0.0, 1.0);
  if (edge >= 1.0) return Gauss::integrate(f, 0.0, 1.0);
  double total = Gauss::integrate(f, 0.0, edge);
  while (edge < 1.0) {
    const double next = std::min(1.0, 2.0 * edge);
    total += Gauss::integrate(f, edge, next);
    edge = next;
  }
  return total;
}

}  // namespace

double repulsion_3d(const std::function<double(double)>& rho, double r_lo, double r_hi, int panels) {
  // points and weights in t = ln r
  std::vector<double> r, w;
  const double t0 = std::log(r_lo), t1 = std::log(r_hi);
  const double width = (t1 - t0) / panels;
  const auto& x = Gauss::abscissa();
  const auto& wx = Gauss::weights();
  for (int p = 0; p < panels; ++p) {
    const double mid = t0 + (p + 0.5) * width;
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (int sign : {-1, 1}) {
        if (i == 0 && sign == 1 && x[0] == 0.0) continue;
        const double t = mid + sign * 0.5 * width * x[i];
        const double rr = std::exp(t);
        r.push_back(rr);
        w.push_back(0.5 * width * wx[i] * rr * rho(rr));
      }
    }
  }
  double j = 0.0;
  for (std::size_t a = 0; a < r.size(); ++a) {
    for (std::size_t b = 0; b < r.size(); ++b) j += w[a] * w[b] * angular(r[a], r[b]);
  }
  return 0.5 * j;
}

ThreeDEnergy he_like_energy_3d(const std::vector<double>& nodes, const std::vector<double>& p,
                               const std::vector<double>& q, double z, double c, int kappa) {
  const double t0 = std::log(nodes.front());
  const double h = std::log(nodes[1]) - t0;
  const double t_end = std::log(nodes.back());
  boost::math::interpolators::cardinal_cubic_b_spline<double> sp(p.begin(), p.end(), t0, h);
  boost::math::interpolators::cardinal_cubic_b_spline<double> sq(q.begin(), q.end(), t0 + 0.5 * h, h);
  const double q_lo = t0 + 0.5 * h, q_hi = t0 + 0.5 * h + h * static_cast<double>(q.size() - 1);
  auto big = [&](double t) { return t < t0 || t > t_end ? 0.0 : sp(t); };
  auto small = [&](double t) { return t < q_lo || t > q_hi ? 0.0 : sq(t); };

  ThreeDEnergy out;
  const int panels = 600;
  const double width = (t_end - t0) / panels;
  for (int k = 0; k < panels; ++k) {
    const double a = t0 + k * width;
    out.one_body_shifted += Gauss::integrate(
        [&](double t) {
          const double r = std::exp(t);
          const double pv = big(t), qv = small(t);
          const double dp = (t < t0 || t > t_end ? 0.0 : sp.prime(t)) / r;
          return r * (-z / r * (pv * pv + qv * qv) - 2.0 * c * c * qv * qv + 2.0 * c * qv * (dp + kappa * pv / r));
        },
        a, a + width);
  }
  out.repulsion = repulsion_3d(
      [&](double r) {
        const double t = std::log(r);
        const double pv = big(t), qv = small(t);
        return pv * pv + qv * qv;
      },
      nodes.front(), nodes.back());
  out.total_shifted = 2.0 * out.one_body_shifted + out.repulsion;
  return out;
}

}  // namespace oracle
