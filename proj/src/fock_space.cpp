#include "dfatoms/fock_space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "dfatoms/dirac_fock.hpp"
#include "dfatoms/error.hpp"
#include "dfatoms/projector.hpp"

namespace dfatoms {

namespace {

constexpr double kRangeSlack = 1e-10;
constexpr double kBlockTolerance = 1e-10;

// Nonzero spectrum of X diag(n) X^T through the Gram matrix of X.
Vector sandwich_spectrum(const Matrix& x, const Vector& n) {
  if (x.cols() == 0) return Vector(0);
  Eigen::SelfAdjointEigenSolver<Matrix> gram(x.transpose() * x);
  const Vector root = gram.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Matrix half = gram.eigenvectors() * root.asDiagonal() * gram.eigenvectors().transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> es(half * n.asDiagonal() * half, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

void require_dirac(const ProblemSpec& spec, const char* what) {
  if (spec.model != Model::dirac) fail(ErrorCode::invalid_argument, std::string(what) + ": spec must be relativistic");
}

std::shared_ptr<const RadialGrid> spec_grid(const ProblemSpec& spec) {
  return std::make_shared<const RadialGrid>(spec.grid.build(spec.nuclear.charge));
}

double fc_value(const DensityMatrix& gamma, const MeanFieldBuilder& builder, double electrons) {
  const ConstraintReport report = check_constraints(gamma, electrons);
  if (!report.ok()) fail(ErrorCode::constraint_violation, "fc_energy: " + report.violated);
  return builder.density_energy(gamma.density).shifted;
}

OperatorTransform compressor(const ProjectorMap& projectors, double c) {
  const double alpha = parked_value(c);
  return [&projectors, alpha](ChannelOperator& op, const DensityState&) {
    auto it = projectors.find(op.channel());
    if (it == projectors.end()) {
      fail(ErrorCode::invalid_config, "no projector for channel " + std::to_string(op.channel()));
    }
    op.compress(it->second.basis, alpha);
  };
}

// tr(H gamma) summed over channels, H the mean field of `field`
double one_body_trace(const MeanFieldBuilder& builder, const DensityState& field, const DensityState& gamma) {
  double t = 0.0;
  for (const auto& cd : gamma.channels) {
    const ChannelOperator h = builder.build(field, cd.channel);
    for (Eigen::Index j = 0; j < cd.vectors.cols(); ++j) {
      t += cd.weights[j] * cd.vectors.col(j).dot(h.apply(cd.vectors.col(j)));
    }
  }
  return t;
}

NoPairCertificate certify(const DensityMatrix& gamma, const ElectronicConfiguration& orbitals,
                          const MeanFieldBuilder& builder, double electrons, double energy) {
  NoPairCertificate cert;
  const DensityState& d = gamma.density;
  for (const auto& cd : d.channels) {
    const double full = occupation_number(d, cd.channel, 1.0);
    for (Eigen::Index j = 0; j < cd.weights.size(); ++j) {
      const double n = cd.weights[j] * full;
      cert.idempotency = std::max(cert.idempotency, std::abs(n * n - n));
      if (n > 0.5) cert.rank += 1.0 / full;
    }
  }
  const ConstraintReport report = check_constraints(gamma, electrons);
  cert.trace = report.trace;
  cert.negative_block = std::max(std::abs(report.negative_min), std::abs(report.negative_max));

  // binding: taking one electron out of the top level must cost energy
  std::size_t top = 0;
  for (std::size_t a = 1; a < orbitals.shells.size(); ++a) {
    if (orbitals.shells[a].energy > orbitals.shells[top].energy) top = a;
  }
  if (!orbitals.shells.empty()) {
    ElectronicConfiguration fewer = orbitals;
    fewer.shells[top].occupation -= 1.0;
    DensityState reduced = DensityState::from(fewer);
    reduced.single_electron = d.single_electron;
    cert.binding_gain = builder.density_energy(reduced).shifted - energy;
  }

  std::ostringstream why;
  if (!(cert.idempotency < 1e-8)) why << "idempotency residual " << cert.idempotency << "; ";
  if (std::abs(cert.rank - electrons) > 1e-8) why << "rank " << cert.rank << " != N; ";
  if (std::abs(cert.trace - electrons) > 1e-8) why << "trace " << cert.trace << " != N; ";
  if (!(cert.negative_block < kBlockTolerance)) why << "negative block " << cert.negative_block << "; ";
  if (!(cert.binding_gain > 0.0)) why << "top electron unbound (gain " << cert.binding_gain << "); ";
  if (!report.ok()) why << report.violated << "; ";
  cert.reason = why.str();
  cert.no_pair = cert.reason.empty();
  return cert;
}

}  // namespace

double occupation_number(const DensityState& density, int channel, double weight) {
  if (density.single_electron) return weight;
  return weight / closed_shell_occupation(density.model, channel);
}

ConstraintReport check_constraints(const DensityMatrix& gamma, double electrons) {
  ConstraintReport r;
  r.trace = gamma.trace();
  std::ostringstream why;
  for (const auto& cd : gamma.density.channels) {
    if (cd.vectors.cols() == 0) continue;
    auto it = gamma.projectors.find(cd.channel);
    if (it == gamma.projectors.end()) {
      why << "no projector for channel " << cd.channel << "; ";
      continue;
    }
    const Matrix& u = *it->second.basis;
    if (u.rows() != cd.vectors.rows()) {
      why << "projector/channel dimension mismatch for channel " << cd.channel << "; ";
      continue;
    }
    const Eigen::Index k = cd.vectors.cols();
    r.orthonormality = std::max(
        r.orthonormality, (cd.vectors.transpose() * cd.vectors - Matrix::Identity(k, k)).cwiseAbs().maxCoeff());
    Vector n(k);
    for (Eigen::Index j = 0; j < k; ++j) n[j] = occupation_number(gamma.density, cd.channel, cd.weights[j]);
    const Matrix x = u * (u.transpose() * cd.vectors);
    const Matrix y = cd.vectors - x;
    const Vector pos = sandwich_spectrum(x, n);
    const Vector neg = sandwich_spectrum(y, n);
    // the blocks have a kernel as well, so 0 belongs to both spectra
    r.positive_min = std::min({r.positive_min, pos.size() ? pos.minCoeff() : 0.0});
    r.positive_max = std::max({r.positive_max, pos.size() ? pos.maxCoeff() : 0.0});
    r.negative_min = std::min({r.negative_min, neg.size() ? neg.minCoeff() : 0.0});
    r.negative_max = std::max({r.negative_max, neg.size() ? neg.maxCoeff() : 0.0});
    const Matrix xx = x.transpose() * x, yy = y.transpose() * y;
    const double off2 = (n.asDiagonal() * xx * n.asDiagonal() * yy).trace();
    r.off_diagonal = std::max(r.off_diagonal, std::sqrt(std::max(0.0, off2)));
  }
  if (r.orthonormality > 1e-10) why << "spectral vectors not orthonormal (" << r.orthonormality << "); ";
  if (r.positive_min < -kRangeSlack || r.positive_max > 1.0 + kRangeSlack) {
    why << "P+ gamma P+ spectrum outside [0, 1]: [" << r.positive_min << ", " << r.positive_max << "]; ";
  }
  if (r.negative_min < -1.0 - kRangeSlack || r.negative_max > kRangeSlack) {
    why << "(1-P+) gamma (1-P+) spectrum outside [-1, 0]: [" << r.negative_min << ", " << r.negative_max << "]; ";
  }
  if (r.off_diagonal > kBlockTolerance) why << "P+ gamma (1-P+) = " << r.off_diagonal << " != 0; ";
  if (r.trace > electrons + kRangeSlack) why << "tr gamma = " << r.trace << " > N = " << electrons << "; ";
  r.violated = why.str();
  return r;
}

double fc_energy(const DensityMatrix& gamma, const ProblemSpec& spec) {
  require_dirac(spec, "fc_energy");
  const MeanFieldBuilder builder(spec.model, spec_grid(spec), spec.nuclear, spec.speed_of_light);
  return fc_value(gamma, builder, spec.electron_count());
}

ProjectorMap mean_field_projectors(const ElectronicConfiguration& psi) {
  const MeanFieldBuilder builder(psi);
  const DensityState d = DensityState::from(psi);
  ProjectorMap out;
  for (const Shell& s : psi.shells) {
    if (!out.count(s.channel)) out.emplace(s.channel, spectral_projector(builder.build(d, s.channel), 0.0));
  }
  return out;
}

FixedProjectorResult minimize_fc_fixed_projector(const ProblemSpec& spec, const ProjectorMap& projectors,
                                                 const FockControls& controls, const ElectronicConfiguration* start) {
  require_dirac(spec, "minimize_fc_fixed_projector");
  const double electrons = spec.electron_count();
  if (!(electrons < spec.nuclear.charge + 1.0)) fail(ErrorCode::invalid_config, "N < Z+1 violated");
  auto grid = start ? start->grid : spec_grid(spec);
  const MeanFieldBuilder builder(spec.model, grid, spec.nuclear, spec.speed_of_light);
  const OperatorTransform compress = compressor(projectors, spec.speed_of_light);
  const double eig_tol = 1e-11;

  FixedProjectorResult out;
  ElectronicConfiguration psi = start ? *start : initial_guess(spec, grid);
  aufbau_fill(psi, builder, DensityState::from(psi), compress, EigenMethod::automatic, eig_tol);
  DensityMatrix gamma{DensityState::from(psi), projectors};

  double f = fc_value(gamma, builder, electrons);
  for (int iter = 1; iter <= controls.max_iter; ++iter) {
    out.energy_history.push_back(f);
    out.iterations = iter;
    aufbau_fill(psi, builder, gamma.density, compress, EigenMethod::automatic, eig_tol);
    DensityMatrix target{DensityState::from(psi), projectors};
    target.density.single_electron = gamma.density.single_electron;

    // F((1-t) gamma + t target) = f + t slope + t^2 curve
    const double slope = one_body_trace(builder, gamma.density, target.density) -
                         one_body_trace(builder, gamma.density, gamma.density);
    double idem = 0.0;
    for (const auto& cd : gamma.density.channels) {
      for (Eigen::Index j = 0; j < cd.weights.size(); ++j) {
        const double n = occupation_number(gamma.density, cd.channel, cd.weights[j]);
        idem = std::max(idem, std::abs(n * n - n));
      }
    }
    if (std::abs(slope) < controls.energy_tolerance * std::max(1.0, std::abs(f)) &&
        idem < controls.idempotency_tolerance) {
      out.converged = true;
      break;
    }
    const double f_target = fc_value(target, builder, electrons);
    const double curve = f_target - f - slope;
    double t = 1.0;
    if (curve > 0.0) t = std::clamp(-slope / (2.0 * curve), 0.0, 1.0);
    out.damping.push_back(t);
    if (t == 1.0) {
      gamma = std::move(target);
      f = f_target;
    } else {
      gamma.density = DensityState::mix(target.density, gamma.density, t);
      f = fc_value(gamma, builder, electrons);
    }
  }
  for (std::size_t i = 3; i < out.energy_history.size(); ++i) {
    const double prev = out.energy_history[i - 1];
    if (out.energy_history[i] > prev + 1e-12 * std::max(1.0, std::abs(prev))) out.monotone = false;
  }
  out.gamma = gamma;
  out.energy = f;
  out.orbitals = psi;
  out.certificate = certify(gamma, psi, builder, electrons, f);
  return out;
}

ProjectorIterationResult maxmin_projector_iteration(const ProblemSpec& spec,
                                                    const ProjectorIterationControls& controls,
                                                    const ElectronicConfiguration* start) {
  require_dirac(spec, "maxmin_projector_iteration");
  if (controls.open_shell_experiment) {
    spec.nuclear.validate();
    if (!(spec.electron_count() < spec.nuclear.charge + 1.0)) fail(ErrorCode::invalid_config, "N < Z+1 violated");
  } else {
    spec.validate();
  }
  ProjectorIterationResult out;
  ElectronicConfiguration psi = start ? *start : initial_guess(spec, spec_grid(spec));
  ProjectorMap current = mean_field_projectors(psi);
  for (int iter = 0; iter < controls.max_iter; ++iter) {
    out.last = minimize_fc_fixed_projector(spec, current, controls.inner, &psi);
    psi = out.last.orbitals;
    ProjectorMap next = mean_field_projectors(psi);
    double dist = 0.0;
    for (const auto& [ch, p] : next) dist = std::max(dist, subspace_distance(*p.basis, *current.at(ch).basis));
    out.distances.push_back(dist);
    out.energies.push_back(out.last.energy);
    out.updates = iter + 1;
    out.projectors = current;
    current = std::move(next);
    if (dist < controls.distance_tolerance) {
      out.converged = true;
      break;
    }
    const auto w = static_cast<std::size_t>(controls.oscillation_window);
    if (out.distances.size() > w) {
      const auto tail = out.distances.end() - static_cast<std::ptrdiff_t>(w);
      if (*std::min_element(tail, out.distances.end()) >= *(tail - 1)) {
        out.oscillating = true;
        break;
      }
    }
  }
  // the mean field of the final orbitals against the projector they were computed under
  out.certificate_distance = out.distances.empty() ? 1.0 : out.distances.back();
  out.certified = out.converged && out.certificate_distance < controls.distance_tolerance &&
                  out.last.certificate.no_pair;
  return out;
}

}  // namespace dfatoms
