#include <cmath>

#include "checks.hpp"
#include "doctest.h"
#include "dfatoms/channel.hpp"
#include "dfatoms/error.hpp"
#include "dfatoms/nonrel_limit.hpp"
#include "dfatoms/projector.hpp"
#include "oracles/sommerfeld.hpp"
#include "oracles/sto_hf.hpp"

using namespace dfatoms;

namespace {

ProblemSpec atom(double z, std::vector<ShellSpec> shells, std::size_t m = 800) {
  ProblemSpec s;
  s.nuclear.charge = z;
  s.shells = std::move(shells);
  s.grid.size = m;
  return s;
}

}  // namespace

TEST_CASE("partner shells") {
  std::vector<std::size_t> pairing;
  const auto nr = nonrelativistic_partner(atom(10, {{1, -1, 2}, {2, -1, 2}, {2, 1, 2}, {2, -2, 4}}), &pairing);
  CHECK(nr.model == Model::schrodinger);
  REQUIRE(nr.shells.size() == 3);
  CHECK(nr.shells[2].channel == 1);
  CHECK(nr.shells[2].occupation == 6.0);
  CHECK(pairing == std::vector<std::size_t>{0, 1, 2, 2});
}

TEST_CASE("hydrogen multiplier") {
  std::vector<double> steps, values;
  for (std::size_t m : {1000, 2000, 4000}) {
    const auto r = hf_scf(nonrelativistic_partner(atom(1, {{1, -1, 1}}, m)));
    REQUIRE(r.converged);
    steps.push_back(r.configuration.grid->step());
    values.push_back(r.configuration.shells[0].energy);
  }
  CHECK(std::abs(oracle::richardson(steps, values) + 0.5) < 1e-7);
}

TEST_CASE("helium Hartree-Fock against the exponential-basis oracle") {
  const auto r = hf_scf(nonrelativistic_partner(atom(2, {{1, -1, 2}}, 2000)));
  checks::bounds(r);
  const auto sto = oracle::sto_hf_1s2_optimized(2.0, 6);
  CHECK(std::abs(r.energy.shifted - sto.energy) < 5e-4);
  CHECK(std::abs(r.configuration.shells[0].energy - sto.orbital_energy) < 5e-4);
  // the basis is variational: it cannot go below the grid limit by more than the grid error
  CHECK(sto.energy > -2.8618);
}

TEST_CASE("beryllium Hartree-Fock brackets") {
  const auto r = hf_scf(nonrelativistic_partner(atom(4, {{1, -1, 2}, {2, -1, 2}}, 2000)));
  checks::bounds(r);
  CHECK(r.energy.shifted > -15.0);
  CHECK(r.energy.shifted < -14.0);
  const auto& s = r.configuration.shells;
  CHECK(s[0].energy < s[1].energy);
  CHECK(s[1].energy < 0.0);
}

TEST_CASE("hf_scf rejects relativistic specs") {
  CHECK_THROWS_AS(hf_scf(atom(2, {{1, -1, 2}})), Error);
}

TEST_CASE("kinetic balance of free positive states improves with c") {
  const auto grid = std::make_shared<const RadialGrid>(GridSpec{1e-4, 40.0, 400}.build(1.0));
  double previous = 1e300;
  for (double f : {1.0, 4.0, 16.0}) {
    const double c = kSpeedOfLight * f;
    const auto op = dirac_channel_matrix(grid, -1, c, RadialPotential::zero(*grid));
    const auto spec = diagonalize_channel(op);
    // lowest positive-energy state
    Eigen::Index k = 0;
    while (spec.values[k] + c * c < 0.0) ++k;
    ElectronicConfiguration psi;
    psi.grid = grid;
    psi.speed_of_light = c;
    psi.shells.push_back(Shell{1, -1, 1.0, spec.vectors.col(k), spec.values[k] + c * c});
    const double res = kinetic_balance_residual(psi)[0];
    CHECK(res < previous);
    previous = res;
  }
  CHECK(previous < 1e-6);
}

TEST_CASE("hydrogen limit slopes") {
  const auto t = limit_study(atom(1, {{1, -1, 1}}, 1000), {1, 2, 4, 8});
  REQUIRE(t.rows.size() == 4);
  CHECK(t.energy_slope == doctest::Approx(-2.0).epsilon(0.1));
  CHECK(t.kb_slopes[0] == doctest::Approx(-3.0).epsilon(0.1));
  const double ratio = t.rows[0].kb_residual[0] / t.rows[1].kb_residual[0];
  CHECK(ratio == doctest::Approx(8.0).epsilon(0.1));
  CHECK(t.energy_monotone);
}

TEST_CASE("helium limit table") {
  const auto t = limit_study(atom(2, {{1, -1, 2}}, 1000), {1, 2, 4, 8, 16});
  REQUIRE(t.rows.size() == 5);
  CHECK(t.energy_monotone);
  CHECK(t.large_monotone);
  for (std::size_t i = 0; i + 1 < t.rows.size(); ++i) {
    CHECK(std::abs(t.rows[i + 1].energy_shifted - t.e_hf) < std::abs(t.rows[i].energy_shifted - t.e_hf));
  }
  CHECK(std::abs(t.rows.back().eigenvalues_shifted[0] - t.hf_multipliers[0]) < 1e-4);
  CHECK(t.kb_slopes[0] == doctest::Approx(-3.0).epsilon(0.1));

  const std::string csv = t.csv();
  CHECK(csv.find('\n') != std::string::npos);
  std::size_t lines = 0;
  for (char ch : csv) lines += ch == '\n';
  CHECK(lines == 6);
}

TEST_CASE("log-log slope") {
  CHECK(loglog_slope({1, 2, 4}, {1, 0.25, 0.0625}) == doctest::Approx(-2.0));
  CHECK(loglog_slope({1, 10}, {-3, -300}) == doctest::Approx(2.0));
}
