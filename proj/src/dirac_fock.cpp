#include "dfatoms/dirac_fock.hpp"

#include <cmath>
#include <string>

#include "dfatoms/angular.hpp"
#include "dfatoms/error.hpp"

namespace dfatoms {

double EnergyBreakdown::double_counting_defect() const {
  return std::abs(shifted - (eigenvalue_sum_shifted - (direct - exchange)));
}

int max_multipole(Model model, int channel_a, int channel_b) {
  if (model == Model::dirac) return (kappa_to_two_j(channel_a) + kappa_to_two_j(channel_b)) / 2;
  return channel_a + channel_b;
}

double exchange_weight(Model model, bool single_electron, int channel_a, int channel_b, int k) {
  if (single_electron) return k == 0 && channel_a == channel_b ? 1.0 : 0.0;
  if (model == Model::dirac) return relativistic_exchange_weight(channel_a, channel_b, k);
  return 0.5 * nonrelativistic_exchange_weight(channel_a, channel_b, k);
}

bool supported_channel(Model model, int channel) {
  if (model == Model::dirac) return channel == -1 || channel == 1 || channel == -2;
  return channel == 0 || channel == 1;
}

MeanFieldBuilder::MeanFieldBuilder(Model model, std::shared_ptr<const RadialGrid> grid, NuclearModel nuclear,
                                   double c)
    : model_(model),
      grid_(std::move(grid)),
      nuclear_model_(nuclear),
      c_(model == Model::dirac ? c : 0.0),
      nuclear_(nuclear_potential(nuclear, *grid_)),
      kernels_(grid_) {}

MeanFieldBuilder::MeanFieldBuilder(const ElectronicConfiguration& psi)
    : MeanFieldBuilder(psi.model, psi.grid, psi.nuclear, psi.speed_of_light) {}

ChannelOperator MeanFieldBuilder::bare(int channel) const {
  if (model_ == Model::dirac) return dirac_channel_matrix(grid_, channel, c_, nuclear_);
  return schrodinger_channel_matrix(grid_, channel, nuclear_);
}

Vector MeanFieldBuilder::node_density(const DensityState& density) const {
  const bool rel = model_ == Model::dirac;
  Vector d = Vector::Zero(static_cast<Eigen::Index>(grid_->size()));
  for (const auto& cd : density.channels) {
    for (Eigen::Index j = 0; j < cd.vectors.cols(); ++j) {
      d += cd.weights[j] * lumped_pair_density(*grid_, rel, cd.vectors.col(j), cd.vectors.col(j));
    }
  }
  return d;
}

Vector MeanFieldBuilder::direct_potential(const DensityState& density) const {
  return kernels_.get(0)->potential(node_density(density));
}

ChannelOperator MeanFieldBuilder::build(const DensityState& density, int channel) const {
  if (!supported_channel(model_, channel)) {
    fail(ErrorCode::invalid_argument, "mean_field_matrix: channel " + std::to_string(channel) + " not supported");
  }
  ChannelOperator op = bare(channel);
  op.set_kind(model_ == Model::dirac ? OperatorKind::mean_field_dirac : OperatorKind::mean_field_schrodinger);
  if (density.channels.empty()) return op;
  op.add_node_potential(direct_potential(density));
  for (const auto& cd : density.channels) {
    const int kmax = max_multipole(model_, channel, cd.channel);
    for (int k = 0; k <= kmax; ++k) {
      const double lambda = exchange_weight(model_, density.single_electron, channel, cd.channel, k);
      if (lambda == 0.0) continue;
      for (Eigen::Index j = 0; j < cd.vectors.cols(); ++j) {
        op.add_exchange({cd.weights[j] * lambda, kernels_.get(k), cd.vectors.col(j)});
      }
    }
  }
  return op;
}

EnergyBreakdown MeanFieldBuilder::energy(const ElectronicConfiguration& psi) const {
  EnergyBreakdown e;
  const bool rel = model_ == Model::dirac;
  const double c2 = c_ * c_;
  const double n = psi.electron_count();
  const bool single = psi.single_electron();
  double one_shifted = 0.0;
  for (const auto& s : psi.shells) {
    const ChannelOperator h = bare(s.channel);
    one_shifted += s.occupation * s.state.dot(h.apply(s.state));
    e.eigenvalue_sum += s.occupation * s.energy;
    e.eigenvalue_sum_shifted += s.occupation * (s.energy - c2);
  }
  const DensityState density = DensityState::from(psi);
  if (!psi.shells.empty()) {
    const Vector d = node_density(density);
    e.direct = 0.5 * kernels_.get(0)->pair_energy(d, d);
  }
  for (const auto& a : psi.shells) {
    for (const auto& b : psi.shells) {
      const int kmax = max_multipole(model_, a.channel, b.channel);
      const Vector f = lumped_pair_density(*grid_, rel, a.state, b.state);
      for (int k = 0; k <= kmax; ++k) {
        const double lambda = exchange_weight(model_, single, a.channel, b.channel, k);
        if (lambda == 0.0) continue;
        e.exchange += 0.5 * a.occupation * b.occupation * lambda * kernels_.get(k)->pair_energy(f, f);
      }
    }
  }
  e.one_body = one_shifted + n * c2;
  e.shifted = one_shifted + e.direct - e.exchange;
  e.total = e.shifted + n * c2;
  return e;
}

EnergyBreakdown MeanFieldBuilder::density_energy(const DensityState& density) const {
  EnergyBreakdown e;
  const bool rel = model_ == Model::dirac;
  const double c2 = c_ * c_;
  const double n = density.trace();
  double one_shifted = 0.0;
  for (const auto& cd : density.channels) {
    const ChannelOperator h = bare(cd.channel);
    for (Eigen::Index j = 0; j < cd.vectors.cols(); ++j) {
      one_shifted += cd.weights[j] * cd.vectors.col(j).dot(h.apply(cd.vectors.col(j)));
    }
  }
  if (!density.channels.empty()) {
    const Vector d = node_density(density);
    e.direct = 0.5 * kernels_.get(0)->pair_energy(d, d);
  }
  for (const auto& ca : density.channels) {
    for (const auto& cb : density.channels) {
      const int kmax = max_multipole(model_, ca.channel, cb.channel);
      for (Eigen::Index i = 0; i < ca.vectors.cols(); ++i) {
        for (Eigen::Index j = 0; j < cb.vectors.cols(); ++j) {
          const Vector f = lumped_pair_density(*grid_, rel, ca.vectors.col(i), cb.vectors.col(j));
          for (int k = 0; k <= kmax; ++k) {
            const double lambda = exchange_weight(model_, density.single_electron, ca.channel, cb.channel, k);
            if (lambda == 0.0) continue;
            e.exchange += 0.5 * ca.weights[i] * cb.weights[j] * lambda * kernels_.get(k)->pair_energy(f, f);
          }
        }
      }
    }
  }
  e.one_body = one_shifted + n * c2;
  e.shifted = one_shifted + e.direct - e.exchange;
  e.total = e.shifted + n * c2;
  return e;
}

Vector radial_density(const ElectronicConfiguration& psi) {
  if (psi.shells.empty()) return Vector::Zero(static_cast<Eigen::Index>(psi.grid->size()));
  return MeanFieldBuilder(psi).node_density(DensityState::from(psi));
}

ChannelOperator mean_field_matrix(const ElectronicConfiguration& psi, int channel) {
  return MeanFieldBuilder(psi).build(DensityState::from(psi), channel);
}

EnergyBreakdown df_energy(const ElectronicConfiguration& psi) { return MeanFieldBuilder(psi).energy(psi); }

}  // namespace dfatoms
