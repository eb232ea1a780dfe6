// Acceptance runner: `acceptance N` checks criterion N (1..10) and prints
// one line "criterion N: PASS|FAIL  <detail>".  Exit status 0 on pass.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dfatoms/angular.hpp"
#include "dfatoms/channel.hpp"
#include "dfatoms/dirac_fock.hpp"
#include "dfatoms/fock_space.hpp"
#include "dfatoms/linalg.hpp"
#include "dfatoms/nonrel_limit.hpp"
#include "dfatoms/projector.hpp"
#include "dfatoms/scf.hpp"
#include "dfatoms/variational.hpp"
#include "oracles/coulomb3d.hpp"
#include "oracles/sommerfeld.hpp"
#include "oracles/sto_hf.hpp"

using namespace dfatoms;

namespace {

constexpr double c0 = kSpeedOfLight;

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

std::string times_c(double f) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%gc", f);
  return buf;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

ProblemSpec atom(double z, std::vector<ShellSpec> shells, std::size_t m = 2000, double c = c0) {
  ProblemSpec s;
  s.nuclear.charge = z;
  s.shells = std::move(shells);
  s.grid.size = m;
  s.speed_of_light = c;
  return s;
}

ProblemSpec helium(std::size_t m = 2000, double c = c0) { return atom(2, {{1, -1, 2}}, m, c); }
ProblemSpec beryllium(std::size_t m = 2000, double c = c0) { return atom(4, {{1, -1, 2}, {2, -1, 2}}, m, c); }

// 0 < eps_k < c^2, 0 < E < N c^2, Gram within 1e-10; returns the violation count
int bound_violations(const SCFReport& r, std::string& why) {
  const auto& psi = r.configuration;
  const double c2 = psi.speed_of_light * psi.speed_of_light;
  int bad = 0;
  for (const auto& s : psi.shells) {
    if (!(s.energy > 0.0 && s.energy < c2)) ++bad, why += " eps";
  }
  if (!(r.energy.total > 0.0 && r.energy.shifted < 0.0)) ++bad, why += " E";
  if (!(psi.gram_error() < 1e-10)) ++bad, why += " gram";
  return bad;
}

// 1. linear oracle equivalence
Verdict linear_oracle() {
  Verdict v;
  double worst = 0.0;
  for (auto [z, kappa, n] : {std::tuple{1.0, -1, 1}, {20.0, -1, 1}, {92.0, -1, 1}, {92.0, -1, 2}, {92.0, 1, 2}}) {
    std::vector<double> steps, values;
    for (std::size_t m : {1000, 2000, 4000}) {
      const auto r = scf_solve(atom(z, {{n, kappa, 1}}, m));
      v.require(r.converged, "scf Z=" + fmt(z));
      steps.push_back(r.configuration.grid->step());
      values.push_back(r.energy.shifted);
    }
    const double exact = oracle::dirac_coulomb_binding(z, kappa, n, c0);
    const double rel = std::abs(oracle::richardson(steps, values) / exact - 1.0);
    worst = std::max(worst, rel);
    v.require(rel < 1e-6, "Z=" + fmt(z) + " kappa=" + std::to_string(kappa) + " n=" + std::to_string(n));
  }
  v.detail << " worst relative deviation " << fmt(worst);
  return v;
}

// 2. bounds on a spread of converged runs
Verdict bounds() {
  Verdict v;
  std::vector<ProblemSpec> runs = {atom(1, {{1, -1, 1}}),
                                   atom(92, {{1, -1, 1}}),
                                   helium(),
                                   beryllium(),
                                   atom(10, {{1, -1, 2}, {2, -1, 2}, {2, 1, 2}, {2, -2, 4}}),
                                   helium(2000, 10.0 * c0),
                                   atom(50, {{1, -1, 2}, {2, -1, 2}, {2, 1, 2}, {2, -2, 4}})};
  int checked = 0, violations = 0;
  double worst_gram = 0.0;
  for (const auto& spec : runs) {
    const auto r = scf_solve(spec);
    if (!r.converged) continue;
    ++checked;
    std::string why;
    violations += bound_violations(r, why);
    worst_gram = std::max(worst_gram, r.configuration.gram_error());
    if (!why.empty()) v.require(false, "Z=" + fmt(spec.nuclear.charge) + why);
  }
  for (const auto& p : {projected_scf(helium(600), ProjectorSource::free),
                        projected_scf(beryllium(600), ProjectorSource::free)}) {
    if (!p.scf.converged) continue;
    ++checked;
    std::string why;
    violations += bound_violations(p.scf, why);
    worst_gram = std::max(worst_gram, p.scf.configuration.gram_error());
  }
  v.require(checked == static_cast<int>(runs.size()) + 2, "every run converges");
  v.require(violations == 0, "bounds");
  v.detail << " " << checked << " converged runs, " << violations << " violations, worst Gram error "
           << fmt(worst_gram);
  return v;
}

// 3. negative-projector residual
Verdict lambda_minus() {
  Verdict v;
  ScfControls ctl;
  ctl.lambda_check = LambdaCheck::always;
  double worst = 0.0;
  for (const auto& spec : {helium(), beryllium()}) {
    const auto r = scf_solve(spec, ctl);
    v.require(r.converged, "scf");
    v.require(r.lambda_minus_residuals.size() == spec.shells.size(), "residuals evaluated");
    for (double x : r.lambda_minus_residuals) worst = std::max(worst, x);
  }
  v.require(worst < 1e-8, "max residual < 1e-8");
  v.detail << " max ||Lambda^- psi_k|| " << fmt(worst);
  return v;
}

// 4. nonrelativistic limit
Verdict nonrel_limit() {
  Verdict v;
  for (const auto& spec : {helium(), beryllium()}) {
    const std::string tag = spec.nuclear.charge == 2 ? "He" : "Be";
    const LimitTable t = limit_study(spec, {1, 2, 4, 8});
    bool strictly = true;
    for (std::size_t i = 0; i + 1 < t.rows.size(); ++i) {
      strictly = strictly && std::abs(t.rows[i + 1].energy_shifted - t.e_hf) < std::abs(t.rows[i].energy_shifted - t.e_hf);
    }
    v.require(strictly, tag + " energy gap strictly decreasing");
    v.require(std::abs(t.energy_slope + 2.0) <= 0.3, tag + " energy slope");
    for (double s : t.multiplier_slopes) v.require(std::abs(s + 2.0) <= 0.3, tag + " multiplier slope");
    for (double s : t.kb_slopes) v.require(std::abs(s + 3.0) <= 0.3, tag + " kinetic-balance slope");
    v.detail << " " << tag << ": E slope " << fmt(t.energy_slope) << ", multiplier slopes";
    for (double s : t.multiplier_slopes) v.detail << " " << fmt(s);
    v.detail << ", kb slopes";
    for (double s : t.kb_slopes) v.detail << " " << fmt(s);
    v.detail << ";";
    if (tag == "He") {
      const double sto = oracle::sto_hf_1s2_optimized(2.0, 6).energy;
      v.require(std::abs(t.e_hf - sto) < 5e-4, "E_HF(He) vs basis oracle");
      v.detail << " E_HF " << t.e_hf << " vs basis " << sto << ";";
    }
  }
  return v;
}

// 5. projector independence of the max-min value
Verdict projector_independence() {
  Verdict v;
  for (auto [factor, tol] : {std::pair{1.0, 1e-3}, {10.0, 1e-4}}) {
    const auto spec = helium(80, factor * c0);
    const auto a = maxmin_energy(spec, ProjectorSource::free);
    const auto b = maxmin_energy(spec, ProjectorSource::mean_field);
    const double scale = std::abs(a.e_scf);
    const double gap = std::abs(a.e_outer - b.e_outer);
    v.require(a.converged && b.converged, "outer convergence at " + times_c(factor));
    v.require(gap < tol * scale, "free vs mean_field at " + times_c(factor));
    v.require(std::abs(a.gap_to_scf) < tol * scale && std::abs(b.gap_to_scf) < tol * scale,
              "agreement with scf at " + times_c(factor));
    v.detail << " " << times_c(factor) << ": |free - mean_field| " << fmt(gap) << ", gaps to scf " << fmt(a.gap_to_scf)
             << " " << fmt(b.gap_to_scf) << " (tolerance " << fmt(tol * scale) << ");";
  }
  return v;
}

// 6. closeness of projectors to the free one
Verdict epsilon_close() {
  Verdict v;
  const std::size_t m = 400;
  const auto grid = std::make_shared<const RadialGrid>(GridSpec{0.0, 40.0, m}.build(2.0));
  const double self = epsilon_closeness(free_positive_projector(-1, c0, grid), -1, c0, grid);
  v.require(self < 1e-10, "eps(Lambda+) = 0");
  v.detail << " eps(Lambda+) " << fmt(self) << "; mean field:";
  double previous = 1e300;
  for (double f : {1.0, 2.0, 4.0}) {
    const double c = f * c0;
    const auto r = scf_solve(helium(m, c));
    v.require(r.converged, "scf");
    const double eps = epsilon_closeness(mean_field_projectors(r.configuration).at(-1), -1, c, r.configuration.grid);
    v.require(eps < previous, "monotone decrease");
    previous = eps;
    v.detail << " " << fmt(eps);
  }
  return v;
}

// 7. no-pair minimizer
Verdict no_pair() {
  Verdict v;
  const auto spec = helium(400);
  const auto ref = scf_solve(spec);
  v.require(ref.converged, "scf");
  const auto mf = minimize_fc_fixed_projector(spec, mean_field_projectors(ref.configuration));
  const auto fr = minimize_fc_fixed_projector(spec, positive_projectors(spec, ProjectorSource::free));
  for (const auto* r : {&mf, &fr}) {
    const std::string tag = r == &mf ? "mean_field" : "free";
    v.require(r->certificate.idempotency < 1e-8, tag + " idempotency");
    v.require(std::abs(r->certificate.rank - 2.0) < 1e-12, tag + " rank");
    v.require(std::abs(r->certificate.trace - 2.0) < 1e-10, tag + " trace");
    v.detail << " " << tag << ": |g^2-g| " << fmt(r->certificate.idempotency) << " rank " << r->certificate.rank
             << " trace " << r->certificate.trace << ";";
  }
  const double rel = std::abs(mf.energy / ref.energy.shifted - 1.0);
  v.require(rel < 1e-8, "F vs scf");
  v.detail << " F(mean_field) vs scf " << fmt(rel);
  return v;
}

// 8. closed-shell fixed point of the projector iteration
Verdict fixed_point() {
  Verdict v;
  for (double f : {1.0, 10.0}) {
    for (const auto& spec : {helium(300, f * c0), beryllium(300, f * c0)}) {
      const auto it = maxmin_projector_iteration(spec);
      const std::string tag = (spec.nuclear.charge == 2 ? "He " : "Be ") + times_c(f);
      v.require(it.converged && it.certified, tag + " certified");
      v.require(it.certificate_distance < 1e-8, tag + " distance");
      v.detail << " " << tag << ": " << it.updates << " updates, distance " << fmt(it.certificate_distance) << ";";
    }
  }
  return v;
}

// 9. angular sum rule as stated, and the radial energy against a 3D quadrature
Verdict angular_and_3d() {
  Verdict v;
  // sum over k of (2 j_b + 1) Lambda^k(a, b) for every pair of channels with j <= 7/2
  double worst = 0.0;
  for (int ka : {-1, 1, -2, 2, -3, 3, -4, 4}) {
    for (int kb : {-1, 1, -2, 2, -3, 3, -4, 4}) {
      double sum = 0.0;
      for (int k = 0; k <= 8; ++k) sum += kappa_to_two_j(kb) + 1 == 0 ? 0.0 : (kappa_to_two_j(kb) + 1) * relativistic_exchange_weight(ka, kb, k);
      worst = std::max(worst, std::abs(sum - 1.0));
    }
  }
  v.require(worst < 1e-12, "sum rule");
  v.detail << " sum rule worst |S - 1| " << fmt(worst) << ";";

  const auto r = scf_solve(helium());
  v.require(r.converged, "scf");
  const auto& g = *r.configuration.grid;
  const Vector p = r.configuration.shells[0].large(g), q = r.configuration.shells[0].small(g);
  const auto e3 = oracle::he_like_energy_3d(std::vector<double>(g.nodes().data(), g.nodes().data() + g.size()),
                                            std::vector<double>(p.data(), p.data() + p.size()),
                                            std::vector<double>(q.data(), q.data() + q.size()), 2.0, c0, -1);
  const double rel = std::abs(e3.total_shifted / r.energy.shifted - 1.0);
  v.require(rel < 1e-4, "3D energy");
  v.detail << " 3D energy " << e3.total_shifted << " vs radial " << r.energy.shifted << " (relative " << fmt(rel) << ")";
  return v;
}

// 10. structural invariants
Verdict invariants() {
  Verdict v;
  std::mt19937 rng(2024);
  std::normal_distribution<double> normal;

  // gradients on random valid frames
  double worst_fd = 0.0;
  const std::vector<ProblemSpec> specs = {helium(300), beryllium(300),
                                          atom(10, {{1, -1, 2}, {2, -1, 2}, {2, 1, 2}, {2, -2, 4}}, 300)};
  for (int trial = 0; trial < 3; ++trial) {
    for (const auto& spec : specs) {
      const auto grid = std::make_shared<const RadialGrid>(spec.grid.build(spec.nuclear.charge));
      ElectronicConfiguration psi = initial_guess(spec, grid);
      // random rotation-free perturbation of every shell, then re-orthonormalize per channel
      for (auto& s : psi.shells) {
        Vector noise(s.state.size());
        for (auto& x : noise) x = normal(rng);
        s.state += 0.2 * noise.cwiseProduct(s.state.cwiseAbs());
      }
      for (std::size_t a = 0; a < psi.shells.size(); ++a) {
        for (std::size_t b = 0; b < a; ++b) {
          if (psi.shells[b].channel == psi.shells[a].channel) {
            psi.shells[a].state -= psi.shells[b].state.dot(psi.shells[a].state) * psi.shells[b].state;
          }
        }
        psi.shells[a].state.normalize();
      }
      for (std::size_t a = 0; a < psi.shells.size(); ++a) {
        Vector d(psi.shells[a].state.size());
        for (auto& x : d) x = normal(rng);
        d = d.cwiseProduct(psi.shells[a].state.cwiseAbs()).normalized();
        const double analytic =
            2.0 * psi.shells[a].occupation * d.dot(mean_field_matrix(psi, psi.shells[a].channel).apply(psi.shells[a].state));
        auto at = [&](double t) {
          ElectronicConfiguration moved = psi;
          moved.shells[a].state += t * d;
          return df_energy(moved).shifted;
        };
        const double h = 1e-5;
        const double numeric = (at(h) - at(-h)) / (2.0 * h);
        worst_fd = std::max(worst_fd, std::abs(numeric - analytic) / std::max(1.0, std::abs(analytic)));
      }
      // the mean field is the derivative of the density functional along an added state
      const MeanFieldBuilder builder(psi);
      const DensityState base = DensityState::from(psi);
      for (const auto& cd : base.channels) {
        Vector x(cd.vectors.rows());
        for (auto& e : x) e = normal(rng);
        x = x.cwiseProduct(cd.vectors.col(0).cwiseAbs());
        x -= cd.vectors * (cd.vectors.transpose() * x);
        x.normalize();
        const double analytic = x.dot(builder.build(base, cd.channel).apply(x));
        auto at = [&](double t) {
          DensityState moved = base;
          for (auto& m : moved.channels) {
            if (m.channel != cd.channel) continue;
            m.vectors.conservativeResize(Eigen::NoChange, m.vectors.cols() + 1);
            m.vectors.col(m.vectors.cols() - 1) = x;
            m.weights.conservativeResize(m.weights.size() + 1);
            m.weights[m.weights.size() - 1] = t;
          }
          return builder.density_energy(moved).shifted;
        };
        const double h = 1e-4;
        const double numeric = (at(h) - at(-h)) / (2.0 * h);
        worst_fd = std::max(worst_fd, std::abs(numeric - analytic) / std::max(1.0, std::abs(analytic)));
      }
    }
  }
  v.require(worst_fd < 1e-6, "finite differences");
  v.detail << " worst gradient mismatch " << fmt(worst_fd) << ";";

  // (H_0)^2 = c^2 K + c^4 on the free channel
  double worst_sq = 0.0;
  const auto grid = std::make_shared<const RadialGrid>(GridSpec{1e-6, 40.0, 300}.build(1.0));
  for (int kappa : {-1, 1, -2}) {
    const auto op = dirac_channel_matrix(grid, kappa, c0, RadialPotential::zero(*grid));
    const ChannelSpectrum s = diagonalize_channel(op);
    std::vector<double> squares;
    for (Eigen::Index i = 0; i < s.values.size(); ++i) squares.push_back(std::pow(s.values[i] + c0 * c0, 2));
    std::sort(squares.begin(), squares.end());
    const KineticFactor b = kinetic_factor(*grid, kappa);
    const Vector sigma = bidiagonal_singular_values(b.diagonal, b.upper);
    const Eigen::Index m = sigma.size();
    for (int i = 0; i < 10; ++i) {
      const double mu = c0 * c0 * sigma[m - 1 - i] * sigma[m - 1 - i] + std::pow(c0, 4);
      worst_sq = std::max({worst_sq, std::abs(squares[2 * i] / mu - 1.0), std::abs(squares[2 * i + 1] / mu - 1.0)});
    }
  }
  v.require(worst_sq < 1e-6, "square identity");
  v.detail << " square identity " << fmt(worst_sq) << ";";

  // nothing in the gap below the bound states, and the bound states in order
  int spurious = 0;
  double worst_level = 0.0;
  for (double z : {1.0, 92.0}) {
    // wide enough for the n = l + 3 level of hydrogen
    const auto g = std::make_shared<const RadialGrid>(GridSpec{0.0, 120.0, 2000}.build(z));
    for (int kappa : {-1, 1, -2}) {
      const auto op = dirac_channel_matrix(g, kappa, c0, nuclear_potential(NuclearModel{z}, *g));
      const ChannelSpectrum s = diagonalize_channel(op);
      std::vector<double> bound;
      for (Eigen::Index i = 0; i < s.values.size(); ++i) {
        const double e = s.values[i] + c0 * c0;  // unshifted
        if (e > -c0 * c0 && e <= 0.0) ++spurious;
        if (e > 0.0 && s.values[i] < 0.0) bound.push_back(s.values[i]);
      }
      const int l = kappa_to_l(kappa);
      for (int i = 0; i < 3 && i < static_cast<int>(bound.size()); ++i) {
        const double exact = oracle::dirac_coulomb_binding(z, kappa, l + 1 + i, c0);
        worst_level = std::max(worst_level, std::abs(bound[i] / exact - 1.0));
      }
    }
  }
  v.require(spurious == 0, "no eigenvalue in (-c^2, 0]");
  v.require(worst_level < 1e-3, "lowest levels match the closed form");
  v.detail << " in-gap spurious " << spurious << ", lowest levels vs closed form " << fmt(worst_level);
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Verdict()>> criteria = {linear_oracle, bounds, lambda_minus, nonrel_limit,
                                                          projector_independence, epsilon_close, no_pair,
                                                          fixed_point, angular_and_3d, invariants};
  if (argc != 2) {
    std::fprintf(stderr, "usage: acceptance N   (1..%zu)\n", criteria.size());
    return 64;
  }
  const int n = std::atoi(argv[1]);
  if (n < 1 || n > static_cast<int>(criteria.size())) {
    std::fprintf(stderr, "acceptance: no criterion %s\n", argv[1]);
    return 64;
  }
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = criteria[static_cast<std::size_t>(n - 1)]();
  } catch (const std::exception& e) {
    v.pass = false;
    v.detail << " exception: " << e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("criterion %d: %s %s (%.1f s)\n", n, v.pass ? "PASS" : "FAIL", v.detail.str().c_str(), secs);
  return v.pass ? 0 : 1;
}
