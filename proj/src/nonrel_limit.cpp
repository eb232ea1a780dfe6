#include "dfatoms/nonrel_limit.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "dfatoms/error.hpp"

namespace dfatoms {

namespace {

void require_relativistic(const ElectronicConfiguration& psi, const char* what) {
  if (!psi.relativistic()) fail(ErrorCode::invalid_argument, std::string(what) + ": configuration is nonrelativistic");
}

std::string number(double x) {
  char buf[40];
  return std::string(buf, std::to_chars(buf, buf + sizeof buf, x).ptr);
}

}  // namespace

std::vector<double> kinetic_balance_residual(const ElectronicConfiguration& psi) {
  require_relativistic(psi, "kinetic_balance_residual");
  const auto m = static_cast<Eigen::Index>(psi.grid->size());
  std::vector<double> out;
  for (const Shell& s : psi.shells) {
    const KineticFactor b = kinetic_factor(*psi.grid, s.channel);
    const Vector r = s.state.tail(m) - b.apply(s.state.head(m)) / (2.0 * psi.speed_of_light);
    out.push_back(r.norm());
  }
  return out;
}

std::vector<double> small_component_norm(const ElectronicConfiguration& psi) {
  require_relativistic(psi, "small_component_norm");
  const auto m = static_cast<Eigen::Index>(psi.grid->size());
  std::vector<double> out;
  for (const Shell& s : psi.shells) out.push_back(s.state.tail(m).norm());
  return out;
}

ProblemSpec nonrelativistic_partner(const ProblemSpec& dirac, std::vector<std::size_t>* pairing) {
  if (dirac.model != Model::dirac) fail(ErrorCode::invalid_argument, "nonrelativistic_partner: spec is not Dirac");
  ProblemSpec out = dirac;
  out.model = Model::schrodinger;
  out.shells.clear();
  std::map<std::pair<int, int>, std::size_t> index;
  if (pairing) pairing->clear();
  for (const ShellSpec& s : dirac.shells) {
    const int l = channel_l(Model::dirac, s.channel);
    auto [it, fresh] = index.try_emplace({s.n, l}, out.shells.size());
    if (fresh) out.shells.push_back({s.n, l, 0.0});
    out.shells[it->second].occupation += s.occupation;
    if (pairing) pairing->push_back(it->second);
  }
  return out;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) fail(ErrorCode::invalid_argument, "loglog_slope: need two or more points");
  const auto n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(std::abs(y[i]));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

LimitTable limit_study(const ProblemSpec& dirac, const std::vector<double>& factors, const ScfControls& controls) {
  dirac.validate();
  if (factors.empty()) fail(ErrorCode::invalid_argument, "limit_study: no c factors");
  for (std::size_t i = 0; i < factors.size(); ++i) {
    if (factors[i] < 1.0 || (i > 0 && factors[i] <= factors[i - 1])) {
      fail(ErrorCode::invalid_argument, "limit_study: c factors must be >= 1 and strictly ascending");
    }
  }
  std::vector<std::size_t> pairing;
  const ProblemSpec hf_spec = nonrelativistic_partner(dirac, &pairing);
  const SCFReport hf = hf_scf(hf_spec, controls);
  if (!hf.converged) fail(ErrorCode::not_converged, "limit_study: Hartree-Fock run did not converge");

  LimitTable table;
  table.e_hf = hf.energy.total;
  const auto& grid = hf.configuration.grid;
  const auto m = static_cast<Eigen::Index>(grid->size());
  for (std::size_t a = 0; a < dirac.shells.size(); ++a) {
    table.hf_multipliers.push_back(hf.configuration.shells[pairing[a]].energy);
    table.shell_n.push_back(dirac.shells[a].n);
    table.shell_kappa.push_back(dirac.shells[a].channel);
  }

  for (double f : factors) {
    ProblemSpec spec = dirac;
    spec.speed_of_light = dirac.speed_of_light * f;
    const SCFReport r = scf_solve(spec, controls);
    if (!r.converged) {
      fail(ErrorCode::not_converged, "limit_study: Dirac-Fock run at c factor " + number(f) + " did not converge");
    }
    LimitRow row;
    row.c = spec.speed_of_light;
    row.energy_shifted = r.energy.shifted;
    row.iterations = r.iterations;
    const double c2 = row.c * row.c;
    for (std::size_t a = 0; a < r.configuration.shells.size(); ++a) {
      const Shell& s = r.configuration.shells[a];
      row.eigenvalues_shifted.push_back(s.energy - c2);
      const Vector p = s.state.head(m);
      Vector ref = hf.configuration.shells[pairing[a]].state;
      if (ref.dot(p) < 0.0) ref = -ref;
      row.large_distance.push_back((p / p.norm() - ref).norm());
    }
    row.kb_residual = kinetic_balance_residual(r.configuration);
    row.small_norm = small_component_norm(r.configuration);
    table.rows.push_back(std::move(row));
  }

  std::vector<double> cs, de;
  for (const auto& row : table.rows) {
    cs.push_back(row.c);
    de.push_back(row.energy_shifted - table.e_hf);
  }
  table.energy_monotone = true;
  table.large_monotone = true;
  for (std::size_t i = 1; i < table.rows.size(); ++i) {
    table.energy_monotone = table.energy_monotone && std::abs(de[i]) < std::abs(de[i - 1]);
    for (std::size_t a = 0; a < dirac.shells.size(); ++a) {
      table.large_monotone =
          table.large_monotone && table.rows[i].large_distance[a] < table.rows[i - 1].large_distance[a];
    }
  }
  if (table.rows.size() >= 2) {
    table.energy_slope = loglog_slope(cs, de);
    for (std::size_t a = 0; a < dirac.shells.size(); ++a) {
      std::vector<double> dm, kb, sn;
      for (const auto& row : table.rows) {
        dm.push_back(row.eigenvalues_shifted[a] - table.hf_multipliers[a]);
        kb.push_back(row.kb_residual[a]);
        sn.push_back(row.small_norm[a]);
      }
      table.multiplier_slopes.push_back(loglog_slope(cs, dm));
      table.kb_slopes.push_back(loglog_slope(cs, kb));
      table.small_norm_slopes.push_back(loglog_slope(cs, sn));
    }
  }
  return table;
}

std::string LimitTable::csv() const {
  std::ostringstream out;
  out << "c,E_DF_minus_Nc2,E_HF";
  for (std::size_t a = 0; a < shell_n.size(); ++a) {
    const std::string tag = std::to_string(shell_n[a]) + "k" + std::to_string(shell_kappa[a]);
    out << ",eps_minus_c2_" << tag << ",lambda_hf_" << tag << ",kb_residual_" << tag << ",small_norm_" << tag
        << ",large_distance_" << tag;
  }
  out << "\n";
  for (const auto& row : rows) {
    out << number(row.c) << "," << number(row.energy_shifted) << "," << number(e_hf);
    for (std::size_t a = 0; a < shell_n.size(); ++a) {
      out << "," << number(row.eigenvalues_shifted[a]) << "," << number(hf_multipliers[a]) << ","
          << number(row.kb_residual[a]) << "," << number(row.small_norm[a]) << "," << number(row.large_distance[a]);
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace dfatoms
