#include "dfatoms/scf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "dfatoms/error.hpp"
#include "dfatoms/projector.hpp"

namespace dfatoms {

namespace {

constexpr Eigen::Index kDenseLambdaLimit = 3000;

// Deterministic orbital phase: the first sizeable large-component entry is positive.
void fix_sign(Vector& x, Eigen::Index m) {
  const double top = x.head(m).cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < m; ++i) {
    if (std::abs(x[i]) > 1e-3 * top) {
      if (x[i] < 0) x = -x;
      return;
    }
  }
}

struct ChannelPlan {
  int channel = 0;
  std::vector<std::size_t> shells;  // indices into the configuration
  int count = 0;                    // levels to compute
};

std::vector<ChannelPlan> plan_channels(const ElectronicConfiguration& psi) {
  std::map<int, ChannelPlan> plans;
  for (std::size_t a = 0; a < psi.shells.size(); ++a) {
    const Shell& s = psi.shells[a];
    ChannelPlan& p = plans[s.channel];
    p.channel = s.channel;
    p.shells.push_back(a);
    p.count = std::max(p.count, level_index(psi.model, s.channel, s.n) + 1);
  }
  std::vector<ChannelPlan> out;
  for (auto& [ch, p] : plans) out.push_back(p);
  return out;
}

void fill_channel(ElectronicConfiguration& psi, const ChannelPlan& plan, const ChannelSpectrum& spectrum) {
  const auto m = static_cast<Eigen::Index>(psi.grid->size());
  for (std::size_t a : plan.shells) {
    Shell& s = psi.shells[a];
    const int level = level_index(psi.model, s.channel, s.n);
    Vector x = spectrum.vectors.col(level);
    x /= x.norm();
    fix_sign(x, m);
    s.state = x;
    s.energy = spectrum.values[level] + spectrum.shift;
  }
}

}  // namespace

double ProblemSpec::electron_count() const {
  double n = 0.0;
  for (const auto& s : shells) n += s.occupation;
  return n;
}

void ProblemSpec::validate() const {
  nuclear.validate();
  if (model == Model::dirac && !(speed_of_light > 0.0)) {
    fail(ErrorCode::invalid_argument, "problem: c must be positive");
  }
  ElectronicConfiguration probe;
  probe.model = model;
  probe.nuclear = nuclear;
  probe.grid = std::make_shared<const RadialGrid>(GridKind::exponential, 1.0, 2.0, 16);
  for (const auto& s : shells) probe.shells.push_back({s.n, s.channel, s.occupation, Vector(), 0.0});
  probe.validate();
  const double n = electron_count();
  if (!(n < nuclear.charge + 1.0)) {
    std::ostringstream msg;
    msg << "N < Z+1 violated: N = " << n << ", Z = " << nuclear.charge;
    fail(ErrorCode::invalid_config, msg.str());
  }
  for (const auto& s : shells) {
    if (!supported_channel(model, s.channel)) {
      fail(ErrorCode::invalid_config, "channel " + std::to_string(s.channel) + " is not supported");
    }
  }
}

std::pair<double, double> bound_window(Model model, double c) {
  if (model == Model::dirac) return {-c * c, 0.0};
  return {-1e15, 0.0};
}

double orbital_residual(const ChannelOperator& op, const Vector& psi, double energy_shifted) {
  return (op.apply(psi) - energy_shifted * psi).norm();
}

ElectronicConfiguration initial_guess(const ProblemSpec& spec, std::shared_ptr<const RadialGrid> grid) {
  ElectronicConfiguration psi;
  psi.model = spec.model;
  psi.nuclear = spec.nuclear;
  psi.speed_of_light = spec.speed_of_light;
  psi.grid = grid;
  for (const auto& s : spec.shells) psi.shells.push_back({s.n, s.channel, s.occupation, Vector(), 0.0});
  const double n = spec.electron_count();
  const double z_eff = std::max(1.0, spec.nuclear.charge - 0.5 * (n - 1.0));
  const MeanFieldBuilder screened(spec.model, grid, spec.nuclear.with_charge(z_eff), spec.speed_of_light);
  const auto [lo, hi] = bound_window(spec.model, spec.speed_of_light);
  for (const ChannelPlan& plan : plan_channels(psi)) {
    const ChannelOperator op = screened.bare(plan.channel);
    fill_channel(psi, plan, lowest_in_window(op, plan.count, lo, hi));
  }
  return psi;
}

void aufbau_fill(ElectronicConfiguration& psi, const MeanFieldBuilder& builder, const DensityState& density,
                 const OperatorTransform& transform, EigenMethod method, double tolerance) {
  const auto [lo, hi] = bound_window(psi.model, psi.speed_of_light);
  for (const ChannelPlan& plan : plan_channels(psi)) {
    ChannelOperator op = builder.build(density, plan.channel);
    if (transform) transform(op, density);
    Matrix guess(op.dimension(), static_cast<Eigen::Index>(plan.shells.size()));
    for (std::size_t j = 0; j < plan.shells.size(); ++j) {
      guess.col(static_cast<Eigen::Index>(j)) = psi.shells[plan.shells[j]].state;
    }
    fill_channel(psi, plan, lowest_in_window(op, plan.count, lo, hi, &guess, method, tolerance));
  }
}

OrbitalCheck check_orbitals(ElectronicConfiguration& psi, const MeanFieldBuilder& builder,
                            const OperatorTransform& transform, double tolerance) {
  const DensityState own = DensityState::from(psi);
  OrbitalCheck out;
  out.residuals.assign(psi.shells.size(), 0.0);
  out.floors.assign(psi.shells.size(), 0.0);
  for (const ChannelPlan& plan : plan_channels(psi)) {
    ChannelOperator op = builder.build(own, plan.channel);
    if (transform) transform(op, own);
    for (std::size_t a : plan.shells) {
      Shell& s = psi.shells[a];
      const double e = s.state.dot(op.apply(s.state));
      s.energy = e + op.shift();
      out.residuals[a] = orbital_residual(op, s.state, e);
      out.floors[a] = residual_rounding_floor(op, s.state, e);
      out.worst = std::max(out.worst, out.residuals[a]);
      out.settled = out.settled && out.residuals[a] < std::max(tolerance, out.floors[a]);
    }
  }
  return out;
}

SCFReport scf_solve(const ProblemSpec& spec, const ScfControls& controls, const OperatorTransform& transform) {
  spec.validate();
  if (!(controls.mixing > 0.0 && controls.mixing <= 1.0)) {
    fail(ErrorCode::invalid_argument, "scf: mixing must lie in (0, 1]");
  }
  auto grid = std::make_shared<const RadialGrid>(spec.grid.build(spec.nuclear.charge));
  SCFReport report;
  report.configuration = initial_guess(spec, grid);
  ElectronicConfiguration& psi = report.configuration;
  const MeanFieldBuilder builder(spec.model, grid, spec.nuclear, spec.speed_of_light);
  const double eig_tol = std::min(1e-11, 1e-3 * controls.residual_tolerance);

  OperatorTransform shifted = transform;
  if (controls.level_shift != 0.0) {
    // pushes the virtual space up; occupied orbitals of the previous step keep their energy
    shifted = [&](ChannelOperator& op, const DensityState& d) {
      op.add_identity(controls.level_shift);
      for (const Shell& s : psi.shells) {
        if (s.channel == op.channel()) op.add_rank_one({-controls.level_shift, s.state});
      }
      if (transform) transform(op, d);
    };
  }

  DensityState mixed = DensityState::from(psi);
  double previous = std::numeric_limits<double>::quiet_NaN();
  for (int iter = 1; iter <= controls.max_iter; ++iter) {
    aufbau_fill(psi, builder, mixed, shifted, controls.method, eig_tol);
    const OrbitalCheck check = check_orbitals(psi, builder, transform, controls.residual_tolerance);
    report.orbital_residuals = check.residuals;
    report.residual_floors = check.floors;
    report.energy = builder.energy(psi);
    report.energy_history.push_back(report.energy.shifted);
    report.residual_history.push_back(check.worst);
    report.iterations = iter;
    const double change = std::abs(report.energy.shifted - previous);
    previous = report.energy.shifted;
    if (iter > 1 && change < controls.energy_tolerance * std::max(1.0, std::abs(report.energy.shifted)) &&
        check.settled) {
      report.converged = true;
      break;
    }
    mixed = DensityState::mix(DensityState::from(psi), mixed, controls.mixing);
  }

  const bool dense_ok = psi.state_dimension() <= kDenseLambdaLimit;
  const bool want = controls.lambda_check == LambdaCheck::always ||
                    (controls.lambda_check == LambdaCheck::automatic && dense_ok);
  if (want && spec.model == Model::dirac) report.lambda_minus_residuals = lambda_minus_residual(psi);
  return report;
}

SCFReport hf_scf(const ProblemSpec& spec, const ScfControls& controls) {
  if (spec.model != Model::schrodinger) fail(ErrorCode::invalid_argument, "hf_scf: spec must be nonrelativistic");
  return scf_solve(spec, controls);
}

}  // namespace dfatoms
