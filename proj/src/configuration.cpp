#include "dfatoms/configuration.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include <Eigen/Eigenvalues>

#include "dfatoms/angular.hpp"
#include "dfatoms/channel.hpp"
#include "dfatoms/error.hpp"

namespace dfatoms {

Vector Shell::large(const RadialGrid& grid) const {
  return unscale_large(grid, state.head(static_cast<Eigen::Index>(grid.size())));
}

Vector Shell::small(const RadialGrid& grid) const {
  const auto m = static_cast<Eigen::Index>(grid.size());
  if (state.size() == m) return Vector::Zero(m);
  return unscale_small(grid, state.tail(m));
}

int channel_l(Model model, int channel) { return model == Model::dirac ? kappa_to_l(channel) : channel; }

double closed_shell_occupation(Model model, int channel) {
  return model == Model::dirac ? 2.0 * std::abs(channel) : 2.0 * (2 * channel + 1);
}

int level_index(Model model, int channel, int n) { return n - channel_l(model, channel) - 1; }

double ElectronicConfiguration::electron_count() const {
  double n = 0.0;
  for (const auto& s : shells) n += s.occupation;
  return n;
}

bool ElectronicConfiguration::single_electron() const {
  return shells.size() == 1 && shells[0].occupation == 1.0;
}

Eigen::Index ElectronicConfiguration::state_dimension() const {
  const auto m = static_cast<Eigen::Index>(grid->size());
  return relativistic() ? 2 * m : m;
}

double ElectronicConfiguration::gram_error() const {
  double worst = 0.0;
  for (std::size_t a = 0; a < shells.size(); ++a) {
    for (std::size_t b = a; b < shells.size(); ++b) {
      if (shells[a].channel != shells[b].channel) continue;
      const double target = a == b ? 1.0 : 0.0;
      worst = std::max(worst, std::abs(shells[a].state.dot(shells[b].state) - target));
    }
  }
  return worst;
}

void ElectronicConfiguration::validate() const {
  nuclear.validate();
  if (!grid) fail(ErrorCode::invalid_argument, "configuration: missing grid");
  for (const auto& s : shells) {
    if (model == Model::dirac && s.channel == 0) fail(ErrorCode::invalid_argument, "configuration: kappa = 0");
    if (model == Model::schrodinger && s.channel < 0) fail(ErrorCode::invalid_argument, "configuration: l < 0");
    if (level_index(model, s.channel, s.n) < 0) {
      fail(ErrorCode::invalid_argument, "configuration: n = " + std::to_string(s.n) +
                                            " is too small for channel " + std::to_string(s.channel));
    }
    const double full = closed_shell_occupation(model, s.channel);
    if (s.occupation == full) continue;
    const bool lone = shells.size() == 1 && s.occupation == 1.0 && channel_l(model, s.channel) <= 1 &&
                      (model == Model::dirac ? std::abs(s.channel) == 1 : s.channel == 0);
    if (!lone) {
      fail(ErrorCode::invalid_config, "occupation must equal " +
                                          std::string(model == Model::dirac ? "2|kappa|" : "2(2l+1)") +
                                          " (closed shell) for channel " + std::to_string(s.channel));
    }
  }
  for (std::size_t a = 0; a < shells.size(); ++a) {
    for (std::size_t b = a + 1; b < shells.size(); ++b) {
      if (shells[a].channel == shells[b].channel && shells[a].n == shells[b].n) {
        fail(ErrorCode::invalid_config, "configuration: shell listed twice");
      }
    }
  }
}

DensityState DensityState::from(const ElectronicConfiguration& psi) {
  DensityState out;
  out.model = psi.model;
  out.single_electron = psi.single_electron();
  std::map<int, std::vector<const Shell*>> by_channel;
  for (const auto& s : psi.shells) by_channel[s.channel].push_back(&s);
  for (const auto& [channel, list] : by_channel) {
    ChannelDensity cd{channel, Matrix(psi.state_dimension(), static_cast<Eigen::Index>(list.size())),
                      Vector(static_cast<Eigen::Index>(list.size()))};
    for (std::size_t j = 0; j < list.size(); ++j) {
      cd.vectors.col(static_cast<Eigen::Index>(j)) = list[j]->state;
      cd.weights[static_cast<Eigen::Index>(j)] = list[j]->occupation;
    }
    out.channels.push_back(std::move(cd));
  }
  return out;
}

namespace {

ChannelDensity compress(int channel, const Matrix& factors, double cutoff) {
  // gamma = F F^T; thin QR then a small eigenproblem
  Eigen::HouseholderQR<Matrix> qr(factors);
  const Eigen::Index r = factors.cols();
  const Matrix q = qr.householderQ() * Matrix::Identity(factors.rows(), r);
  const Matrix rr = qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
  Eigen::SelfAdjointEigenSolver<Matrix> es(rr * rr.transpose());
  const double top = es.eigenvalues().cwiseAbs().maxCoeff();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index j = r - 1; j >= 0; --j) {
    if (es.eigenvalues()[j] > cutoff * top) keep.push_back(j);
  }
  ChannelDensity out{channel, Matrix(factors.rows(), static_cast<Eigen::Index>(keep.size())),
                     Vector(static_cast<Eigen::Index>(keep.size()))};
  for (std::size_t i = 0; i < keep.size(); ++i) {
    out.vectors.col(static_cast<Eigen::Index>(i)) = q * es.eigenvectors().col(keep[i]);
    out.weights[static_cast<Eigen::Index>(i)] = es.eigenvalues()[keep[i]];
  }
  return out;
}

}  // namespace

DensityState DensityState::mix(const DensityState& a, const DensityState& b, double theta, double cutoff) {
  DensityState out;
  out.model = a.model;
  out.single_electron = a.single_electron;
  std::map<int, std::vector<std::pair<const ChannelDensity*, double>>> parts;
  for (const auto& cd : a.channels) parts[cd.channel].push_back({&cd, theta});
  for (const auto& cd : b.channels) parts[cd.channel].push_back({&cd, 1.0 - theta});
  for (const auto& [channel, list] : parts) {
    Eigen::Index cols = 0, rows = 0;
    for (const auto& [cd, s] : list) {
      cols += cd->vectors.cols();
      rows = cd->vectors.rows();
    }
    Matrix f(rows, cols);
    Eigen::Index at = 0;
    for (const auto& [cd, s] : list) {
      for (Eigen::Index j = 0; j < cd->vectors.cols(); ++j) {
        f.col(at++) = std::sqrt(std::max(0.0, s * cd->weights[j])) * cd->vectors.col(j);
      }
    }
    out.channels.push_back(compress(channel, f, cutoff));
  }
  return out;
}

double DensityState::trace() const {
  double t = 0.0;
  for (const auto& cd : channels) t += cd.weights.sum();
  return t;
}

}  // namespace dfatoms
