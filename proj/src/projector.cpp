#include "dfatoms/projector.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "dfatoms/dirac_fock.hpp"
#include "dfatoms/error.hpp"
#include "dfatoms/linalg.hpp"

namespace dfatoms {

Matrix Projector::matrix() const { return (*basis) * basis->transpose(); }

Vector Projector::apply(const Vector& x) const { return (*basis) * (basis->transpose() * x); }

Projector Projector::complement() const {
  const Eigen::Index n = dimension(), r = rank();
  Eigen::HouseholderQR<Matrix> qr(*basis);
  const Matrix q = qr.householderQ();
  return {channel, source, std::make_shared<const Matrix>(q.rightCols(n - r))};
}

double Projector::idempotency_residual() const {
  const Matrix p = matrix();
  return (p * p - p).cwiseAbs().maxCoeff();
}

Projector Projector::from_matrix(int channel, const Matrix& p, ProjectorSource source) {
  if (p.rows() != p.cols()) fail(ErrorCode::invalid_argument, "projector: matrix must be square");
  if (relative_asymmetry(p) > 1e-12) fail(ErrorCode::constraint_violation, "projector: matrix is not symmetric");
  const EigenSystem es = symmetric_eigen(0.5 * (p + p.transpose()));
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < es.values.size(); ++i) {
    const double v = es.values[i];
    if (std::abs(v) > 1e-8 && std::abs(v - 1.0) > 1e-8) {
      fail(ErrorCode::constraint_violation, "projector: matrix is not idempotent");
    }
    if (v > 0.5) keep.push_back(i);
  }
  auto u = std::make_shared<Matrix>(p.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) u->col(static_cast<Eigen::Index>(j)) = es.vectors.col(keep[j]);
  return {channel, source, u};
}

SpectralSplit spectral_split(const ChannelOperator& op, double threshold, ProjectorSource source) {
  const ChannelSpectrum s = diagonalize_channel(op);
  const double t = threshold - op.shift();
  const double c = op.speed_of_light();
  const double guard = 1e-6 * std::max(1.0, c * c);
  Eigen::Index first_positive = s.values.size();
  for (Eigen::Index i = 0; i < s.values.size(); ++i) {
    const double gap = s.values[i] - t;
    if (std::abs(gap) < guard) {
      std::ostringstream msg;
      msg << "spectral_projector: eigenvalue " << s.values[i] + op.shift() << " lies " << gap
          << " from the threshold " << threshold;
      fail(ErrorCode::threshold_collision, msg.str());
    }
    if (gap >= 0.0 && first_positive == s.values.size()) first_positive = i;
  }
  const Eigen::Index n = s.values.size();
  SpectralSplit out;
  out.positive = {op.channel(), source, std::make_shared<const Matrix>(s.vectors.rightCols(n - first_positive))};
  out.negative = {op.channel(), source, std::make_shared<const Matrix>(s.vectors.leftCols(first_positive))};
  out.eigenvalues = s.values.array() + op.shift();
  return out;
}

Projector spectral_projector(const ChannelOperator& op, double threshold, ProjectorSource source) {
  return spectral_split(op, threshold, source).positive;
}

std::vector<double> lambda_minus_residual(const ElectronicConfiguration& psi) {
  std::vector<double> out(psi.shells.size(), 0.0);
  if (psi.shells.empty()) return out;
  const MeanFieldBuilder builder(psi);
  const DensityState density = DensityState::from(psi);
  std::map<int, Projector> negative;
  for (std::size_t a = 0; a < psi.shells.size(); ++a) {
    const int ch = psi.shells[a].channel;
    auto it = negative.find(ch);
    if (it == negative.end()) {
      it = negative.emplace(ch, spectral_split(builder.build(density, ch), 0.0).negative).first;
    }
    out[a] = (it->second.basis->transpose() * psi.shells[a].state).norm();
  }
  return out;
}

Projector free_positive_projector(int kappa, double c, std::shared_ptr<const RadialGrid> grid) {
  const ChannelOperator op = dirac_channel_matrix(grid, kappa, c, RadialPotential::zero(*grid));
  return spectral_split(op, 0.0, ProjectorSource::free).positive;
}

namespace {

// B = U S V^T for the bidiagonal kinetic factor, vectors included.
void bidiagonal_svd(const KineticFactor& b, Vector& sigma, Matrix& u, Matrix& v) {
  const auto n = static_cast<lapack_int>(b.diagonal.size());
  sigma = b.diagonal;
  Vector e = b.upper.head(n - 1);
  Matrix vt = Matrix::Identity(n, n);
  u = Matrix::Identity(n, n);
  double dummy = 0.0;
  const lapack_int info = LAPACKE_dbdsqr(LAPACK_COL_MAJOR, 'U', n, n, n, 0, sigma.data(), e.data(), vt.data(), n,
                                         u.data(), n, &dummy, 1);
  if (info != 0) fail(ErrorCode::not_converged, "epsilon_closeness: bidiagonal SVD failed");
  v = vt.transpose();
}

}  // namespace

double epsilon_closeness(const Projector& p, int kappa, double c, std::shared_ptr<const RadialGrid> grid) {
  const auto m = static_cast<Eigen::Index>(grid->size());
  if (p.dimension() != 2 * m) fail(ErrorCode::invalid_argument, "epsilon_closeness: dimension mismatch");
  const KineticFactor b = kinetic_factor(*grid, kappa);
  Vector sigma;
  Matrix u, v;
  bidiagonal_svd(b, sigma, u, v);
  if (sigma.minCoeff() <= 0.0) {
    fail(ErrorCode::domain_error, "epsilon_closeness: kinetic operator is not positive definite");
  }
  // K_P = V S^2 V^T acts on the large component, K_Q = U S^2 U^T on the small one
  const Vector w = (c * c * sigma.array().square() + std::pow(c, 4)).pow(0.25);
  const Vector wi = w.cwiseInverse();
  const Projector free = free_positive_projector(kappa, c, grid);
  const Matrix diff = p.matrix() - free.matrix();
  // rotate into the kinetic eigenbasis, where W is diagonal
  Matrix r = Matrix::Zero(2 * m, 2 * m);
  r.topLeftCorner(m, m) = v;
  r.bottomRightCorner(m, m) = u;
  Vector wd(2 * m), wdi(2 * m);
  wd << w, w;
  wdi << wi, wi;
  const Matrix a = wd.asDiagonal() * (r.transpose() * diff * r) * wdi.asDiagonal();
  Eigen::BDCSVD<Matrix> svd(a);
  return svd.singularValues()[0];
}

double subspace_distance(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) return 1.0;
  if (a.cols() == 0) return 0.0;
  // sine of the largest principal angle = || (1 - B B^T) A ||_2
  const Matrix resid = a - b * (b.transpose() * a);
  Eigen::BDCSVD<Matrix> svd(resid);
  return std::min(1.0, svd.singularValues()[0]);
}

}  // namespace dfatoms
