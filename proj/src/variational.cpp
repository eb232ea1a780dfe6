#include "dfatoms/variational.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/QR>

#include "dfatoms/error.hpp"
#include "dfatoms/linalg.hpp"

namespace dfatoms {

double parked_value(double c) { return c * c; }

ProjectorMap positive_projectors(const ProblemSpec& spec, ProjectorSource source, const ProjectorMap* file) {
  if (spec.model != Model::dirac) fail(ErrorCode::invalid_argument, "projectors: spec must be relativistic");
  auto grid = std::make_shared<const RadialGrid>(spec.grid.build(spec.nuclear.charge));
  ProjectorMap out;
  for (const auto& s : spec.shells) {
    if (out.count(s.channel)) continue;
    if (source == ProjectorSource::free) {
      out.emplace(s.channel, free_positive_projector(s.channel, spec.speed_of_light, grid));
    } else if (source == ProjectorSource::file) {
      if (file == nullptr) fail(ErrorCode::invalid_argument, "projectors: file source without projectors");
      auto it = file->find(s.channel);
      if (it == file->end()) {
        fail(ErrorCode::invalid_config, "projectors: no projector for channel " + std::to_string(s.channel));
      }
      if (it->second.dimension() != 2 * static_cast<Eigen::Index>(grid->size())) {
        fail(ErrorCode::invalid_config, "projector/channel dimension mismatch for channel " + std::to_string(s.channel));
      }
      out.emplace(s.channel, it->second);
    } else {
      fail(ErrorCode::invalid_argument, "projectors: mean_field projectors depend on the iteration");
    }
  }
  return out;
}

ProjectedReport projected_scf(const ProblemSpec& spec, ProjectorSource source, const ScfControls& controls,
                              const ProjectorMap* file) {
  spec.validate();
  if (spec.model != Model::dirac) fail(ErrorCode::invalid_argument, "projected_scf: spec must be relativistic");
  ProjectedReport out;
  out.source = source;
  if (source != ProjectorSource::mean_field) out.projectors = positive_projectors(spec, source, file);
  const double alpha = parked_value(spec.speed_of_light);
  ProjectorMap& projectors = out.projectors;
  const OperatorTransform compress = [&](ChannelOperator& op, const DensityState&) {
    if (source == ProjectorSource::mean_field) {
      projectors.insert_or_assign(op.channel(), spectral_projector(op, 0.0, ProjectorSource::mean_field));
    }
    const Projector& p = projectors.at(op.channel());
    op.compress(p.basis, alpha);
  };
  out.scf = scf_solve(spec, controls, compress);
  for (const Shell& s : out.scf.configuration.shells) {
    const Projector& p = projectors.at(s.channel);
    out.range_residuals.push_back((s.state - p.apply(s.state)).norm());
  }
  return out;
}

namespace {

// Orthonormal columns spanning range(x), signs fixed by diag(R) > 0.
Matrix retract(const Matrix& x) {
  Eigen::HouseholderQR<Matrix> qr(x);
  Matrix q = qr.householderQ() * Matrix::Identity(x.rows(), x.cols());
  const Matrix r = qr.matrixQR().topRows(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

Matrix sym(const Matrix& a) { return 0.5 * (a + a.transpose()); }

struct ChannelFrame {
  int channel = 0;
  std::vector<std::size_t> shells;
  Matrix positive;  // U+, orthonormal basis of range(P+)
  Matrix negative;  // U-, orthonormal basis of range(P-)
  Matrix z;         // outer frame coordinates in U+: Phi = U+ z
  Matrix y;         // inner coordinates in V = [U-, Phi]
};

// Energy and Euclidean gradients (2 w_a H psi_a) of one configuration.
class Functional {
 public:
  Functional(const MeanFieldBuilder& builder, ElectronicConfiguration shape)
      : builder_(builder), psi_(std::move(shape)) {}

  double energy(const std::vector<ChannelFrame>& frames, const std::vector<Matrix>& psi_cols) {
    load(frames, psi_cols);
    return builder_.energy(psi_).shifted;
  }

  // gradient columns per channel, for the orbitals last loaded
  std::vector<Matrix> gradient(const std::vector<ChannelFrame>& frames) {
    const DensityState d = DensityState::from(psi_);
    std::vector<Matrix> out;
    for (const auto& f : frames) {
      const ChannelOperator op = builder_.build(d, f.channel);
      Matrix g(op.dimension(), static_cast<Eigen::Index>(f.shells.size()));
      for (std::size_t j = 0; j < f.shells.size(); ++j) {
        const Shell& s = psi_.shells[f.shells[j]];
        g.col(static_cast<Eigen::Index>(j)) = 2.0 * s.occupation * op.apply(s.state);
      }
      out.push_back(std::move(g));
    }
    return out;
  }

  ChannelOperator mean_field(int channel) const { return builder_.build(DensityState::from(psi_), channel); }
  const ElectronicConfiguration& configuration() const { return psi_; }
  double max_occupation() const {
    double w = 0.0;
    for (const auto& s : psi_.shells) w = std::max(w, s.occupation);
    return w;
  }

 private:
  void load(const std::vector<ChannelFrame>& frames, const std::vector<Matrix>& psi_cols) {
    for (std::size_t c = 0; c < frames.size(); ++c) {
      for (std::size_t j = 0; j < frames[c].shells.size(); ++j) {
        psi_.shells[frames[c].shells[j]].state = psi_cols[c].col(static_cast<Eigen::Index>(j));
      }
    }
  }

  const MeanFieldBuilder& builder_;
  ElectronicConfiguration psi_;
};

Matrix inner_space(const ChannelFrame& f) {
  Matrix v(f.negative.rows(), f.negative.cols() + f.z.cols());
  v << f.negative, f.positive * f.z;
  return v;
}

// (|A - theta| + 1)^{-1} for a symmetric A, as a dense matrix.
Matrix preconditioner(const Matrix& a, double theta) {
  const EigenSystem es = symmetric_eigen(sym(a));
  const Vector d = ((es.values.array() - theta).abs() + 1.0).inverse();
  return es.vectors * d.asDiagonal() * es.vectors.transpose();
}

struct InnerResult {
  double value = 0.0;
  std::vector<Matrix> gradient;  // full-space Euclidean gradients at the maximiser
  int iterations = 0;
  double gradient_norm = 0.0;
  bool monotone = true;
};

// relative size of energy changes that can no longer be resolved
constexpr double kRounding = 1e-14;

class MaxMin {
 public:
  MaxMin(Functional& fn, std::vector<ChannelFrame>& frames, const MinMaxControls& controls, double n_electrons)
      : fn_(fn), frames_(frames), controls_(controls), ceiling_(10.0) {
    (void)n_electrons;
  }

  // sup over frames in V = range(P-) + span(Phi), warm started from the
  // current y of every channel
  InnerResult inner() {
    std::vector<Matrix> v;
    for (const auto& f : frames_) v.push_back(inner_space(f));
    auto columns = [&](const std::vector<Matrix>& ys) {
      std::vector<Matrix> cols;
      for (std::size_t c = 0; c < frames_.size(); ++c) cols.push_back(v[c] * ys[c]);
      return cols;
    };
    std::vector<Matrix> ys;
    for (const auto& f : frames_) ys.push_back(f.y);
    double e = fn_.energy(frames_, columns(ys));
    std::vector<Matrix> g = fn_.gradient(frames_);

    // preconditioners from the mean field at the start of the solve
    std::vector<Matrix> prec;
    for (std::size_t c = 0; c < frames_.size(); ++c) {
      const ChannelOperator op = fn_.mean_field(frames_[c].channel);
      Matrix hv(v[c].rows(), v[c].cols());
      for (Eigen::Index j = 0; j < v[c].cols(); ++j) hv.col(j) = op.apply(v[c].col(j));
      const Matrix a = v[c].transpose() * hv;
      const Matrix cols = v[c] * ys[c];
      double theta = 0.0;
      for (Eigen::Index j = 0; j < cols.cols(); ++j) theta += cols.col(j).dot(op.apply(cols.col(j)));
      theta /= static_cast<double>(cols.cols());
      prec.push_back(preconditioner(a, theta));
    }

    InnerResult out;
    double step = 1.0 / (2.0 * fn_.max_occupation());
    for (int it = 0; it < controls_.max_inner; ++it) {
      std::vector<Matrix> r(frames_.size()), d(frames_.size());
      double rnorm2 = 0.0, slope = 0.0;
      for (std::size_t c = 0; c < frames_.size(); ++c) {
        const Matrix gy = v[c].transpose() * g[c];
        r[c] = gy - ys[c] * sym(ys[c].transpose() * gy);
        rnorm2 += r[c].squaredNorm();
        const Matrix pd = prec[c] * r[c];
        d[c] = pd - ys[c] * sym(ys[c].transpose() * pd);
        slope += (r[c].array() * d[c].array()).sum();
      }
      out.iterations = it;
      // the preconditioned norm sqrt(<r, M r>) is the natural measure: plain
      // gradients are dominated by rounding in the high-energy directions
      if (!(slope > 0.0)) {
        for (std::size_t c = 0; c < frames_.size(); ++c) d[c] = r[c];
        slope = rnorm2;
      }
      out.gradient_norm = std::sqrt(slope);
      if (out.gradient_norm < controls_.inner_tolerance) break;
      if (step * slope < kRounding * std::max(1.0, std::abs(e))) break;
      bool accepted = false;
      for (int back = 0; back < 60; ++back) {
        std::vector<Matrix> trial(frames_.size());
        for (std::size_t c = 0; c < frames_.size(); ++c) trial[c] = retract(ys[c] + step * d[c]);
        const double et = fn_.energy(frames_, columns(trial));
        if (et > ceiling_) {
          fail(ErrorCode::domain_error,
               "maxmin_energy: inner ascent exceeded N c^2 + 10; the projector is not close enough to the free one "
               "or c is too small");
        }
        if (et >= e + 1e-4 * step * slope) {
          ys = std::move(trial);
          e = et;
          accepted = true;
          step = std::min(2.0 * step, 64.0);
          break;
        }
        step *= 0.5;
      }
      if (!accepted) {
        // no ascent left at working precision
        fn_.energy(frames_, columns(ys));
        break;
      }
      g = fn_.gradient(frames_);
    }
    for (std::size_t c = 0; c < frames_.size(); ++c) frames_[c].y = ys[c];
    fn_.energy(frames_, columns(ys));
    out.value = e;
    out.gradient = fn_.gradient(frames_);
    return out;
  }

  // Danskin gradient of the outer function in z coordinates (horizontal part)
  std::vector<Matrix> outer_gradient(const InnerResult& in) const {
    std::vector<Matrix> out;
    for (std::size_t c = 0; c < frames_.size(); ++c) {
      const ChannelFrame& f = frames_[c];
      const Eigen::Index k = f.z.cols();
      const Matrix b = f.y.bottomRows(k);  // Phi^T Psi
      const Matrix gz = f.positive.transpose() * (in.gradient[c] * b.transpose());
      out.push_back(gz - f.z * (f.z.transpose() * gz));
    }
    return out;
  }

  const ChannelFrame& frame(std::size_t c) const { return frames_[c]; }

 private:
  Functional& fn_;
  std::vector<ChannelFrame>& frames_;
  const MinMaxControls& controls_;
  double ceiling_;
};

}  // namespace

MinMaxReport maxmin_energy(const ProblemSpec& spec, ProjectorSource source, const MinMaxControls& controls,
                           const ProjectorMap* file) {
  spec.validate();
  if (spec.model != Model::dirac) fail(ErrorCode::invalid_argument, "maxmin_energy: spec must be relativistic");
  if (spec.grid.size > controls.max_grid) {
    fail(ErrorCode::invalid_argument, "maxmin_energy: grid too fine (M <= " + std::to_string(controls.max_grid) + ")");
  }
  MinMaxReport report;
  report.projector_source = source;

  const SCFReport scf = scf_solve(spec);
  if (!scf.converged) fail(ErrorCode::not_converged, "maxmin_energy: reference SCF did not converge");
  report.e_scf = scf.energy.shifted;
  const auto grid = scf.configuration.grid;
  const MeanFieldBuilder builder(scf.configuration);

  // projectors
  std::map<int, SpectralSplit> splits;
  ProjectorMap fixed;
  if (source == ProjectorSource::file) fixed = positive_projectors(spec, source, file);
  const DensityState scf_density = DensityState::from(scf.configuration);

  ElectronicConfiguration start = initial_guess(spec, grid);
  std::vector<ChannelFrame> frames;
  for (std::size_t a = 0; a < start.shells.size(); ++a) {
    const int ch = start.shells[a].channel;
    auto it = std::find_if(frames.begin(), frames.end(), [&](const ChannelFrame& f) { return f.channel == ch; });
    if (it == frames.end()) {
      ChannelFrame f;
      f.channel = ch;
      if (source == ProjectorSource::free) {
        const SpectralSplit s = spectral_split(
            dirac_channel_matrix(grid, ch, spec.speed_of_light, RadialPotential::zero(*grid)), 0.0,
            ProjectorSource::free);
        f.positive = *s.positive.basis;
        f.negative = *s.negative.basis;
      } else if (source == ProjectorSource::mean_field) {
        const SpectralSplit s = spectral_split(builder.build(scf_density, ch), 0.0);
        f.positive = *s.positive.basis;
        f.negative = *s.negative.basis;
      } else {
        const Projector& p = fixed.at(ch);
        f.positive = *p.basis;
        f.negative = *p.complement().basis;
      }
      frames.push_back(std::move(f));
      it = frames.end() - 1;
    }
    it->shells.push_back(a);
  }
  for (auto& f : frames) {
    Matrix guess(f.positive.rows(), static_cast<Eigen::Index>(f.shells.size()));
    for (std::size_t j = 0; j < f.shells.size(); ++j) {
      guess.col(static_cast<Eigen::Index>(j)) = start.shells[f.shells[j]].state;
    }
    f.z = retract(f.positive.transpose() * guess);
    const Eigen::Index k = f.z.cols();
    f.y = Matrix::Zero(f.negative.cols() + k, k);
    f.y.bottomRows(k) = Matrix::Identity(k, k);
  }

  Functional fn(builder, start);
  MaxMin solver(fn, frames, controls, spec.electron_count());
  InnerResult in = solver.inner();
  report.inner_sup_values.push_back(in.value);
  report.inner_iterations += in.iterations;
  report.inner_monotone = report.inner_monotone && in.monotone;
  double f_now = in.value;
  report.outer_iterates.push_back(f_now);

  double step = 1.0 / (2.0 * fn.max_occupation());
  std::vector<Matrix> previous_g, previous_d;
  double previous_gmg = 0.0;
  for (int outer = 0; outer < controls.max_outer; ++outer) {
    const std::vector<Matrix> g = solver.outer_gradient(in);
    double gnorm2 = 0.0;
    for (const auto& m : g) gnorm2 += m.squaredNorm();
    // preconditioned gradient with the current mean field on range(P+)
    std::vector<Matrix> mg;
    double gmg = 0.0, gmg_cross = 0.0;
    for (std::size_t c = 0; c < frames.size(); ++c) {
      const ChannelFrame& f = frames[c];
      const ChannelOperator op = fn.mean_field(f.channel);
      Matrix hp(f.positive.rows(), f.positive.cols());
      for (Eigen::Index j = 0; j < f.positive.cols(); ++j) hp.col(j) = op.apply(f.positive.col(j));
      const Matrix a = f.positive.transpose() * hp;
      const Matrix az = a * f.z;
      double theta = 0.0;
      for (Eigen::Index j = 0; j < f.z.cols(); ++j) theta += f.z.col(j).dot(az.col(j));
      theta /= static_cast<double>(f.z.cols());
      const Matrix pd = preconditioner(a, theta) * g[c];
      Matrix h = pd - f.z * (f.z.transpose() * pd);
      gmg += (g[c].array() * h.array()).sum();
      if (!previous_g.empty()) gmg_cross += (previous_g[c].array() * h.array()).sum();
      mg.push_back(std::move(h));
    }
    // Polak-Ribiere (clipped at zero) on the preconditioned gradients; the old
    // direction is carried over by projection onto the new tangent space
    double beta = 0.0;
    if (!previous_g.empty() && previous_gmg > 0.0) beta = std::max(0.0, (gmg - gmg_cross) / previous_gmg);
    std::vector<Matrix> d;
    double slope = 0.0;
    for (std::size_t c = 0; c < frames.size(); ++c) {
      Matrix dc = -mg[c];
      if (beta > 0.0) {
        const Matrix& z = frames[c].z;
        dc += beta * (previous_d[c] - z * (z.transpose() * previous_d[c]));
      }
      slope += -(g[c].array() * dc.array()).sum();
      d.push_back(std::move(dc));
    }
    if (!(slope > 0.0)) {
      d.clear();
      slope = gmg;
      for (auto& h : mg) d.push_back(-h);
    }
    previous_g = g;
    previous_gmg = gmg;
    previous_d = d;
    report.gradient_norm = std::sqrt(std::max(gmg, 0.0));
    if (report.gradient_norm < controls.gradient_tolerance) {
      report.converged = true;
      break;
    }
    if (step * slope < kRounding * std::max(1.0, std::abs(f_now))) break;
    const std::vector<ChannelFrame> saved = frames;
    bool accepted = false;
    auto try_step = [&](double t) {
      for (std::size_t c = 0; c < frames.size(); ++c) {
        frames[c] = saved[c];
        frames[c].z = retract(saved[c].z + t * d[c]);
      }
      InnerResult r = solver.inner();
      report.inner_sup_values.push_back(r.value);
      report.inner_iterations += r.iterations;
      report.inner_monotone = report.inner_monotone && r.monotone;
      return r;
    };
    for (int back = 0; back < 40 && !accepted; ++back) {
      InnerResult trial = try_step(step);
      // f is close to quadratic along d: jump to the fitted minimiser
      const double curvature = 2.0 * (trial.value - f_now + slope * step) / (step * step);
      if (curvature > 0.0) {
        const double best = slope / curvature;
        if (best > 0.05 * step && best < 20.0 * step && std::abs(best - step) > 1e-3 * step) {
          InnerResult fitted = try_step(best);
          if (fitted.value <= std::min(trial.value, f_now - 1e-4 * best * slope)) {
            trial = std::move(fitted);
            step = best;
          } else {
            try_step(step);  // restore the first trial's frames
          }
        }
      }
      if (trial.value <= f_now - 1e-4 * step * slope) {
        in = std::move(trial);
        f_now = in.value;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      frames = saved;
      in = solver.inner();
      break;
    }
    report.outer_iterates.push_back(f_now);
  }
  report.e_outer = f_now;
  report.gap_to_scf = std::abs(report.e_outer - report.e_scf);
  return report;
}

}  // namespace dfatoms
