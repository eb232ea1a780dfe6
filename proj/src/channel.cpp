#include "dfatoms/channel.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include "dfatoms/error.hpp"

namespace dfatoms {

bool is_relativistic(OperatorKind kind) {
  return kind == OperatorKind::dirac || kind == OperatorKind::mean_field_dirac;
}

Vector KineticFactor::apply(const Vector& p) const {
  const Eigen::Index m = diagonal.size();
  Vector q(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    q[i] = diagonal[i] * p[i] + (i + 1 < m ? upper[i] * p[i + 1] : 0.0);
  }
  return q;
}

Vector KineticFactor::apply_transpose(const Vector& q) const {
  const Eigen::Index m = diagonal.size();
  Vector p(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    p[j] = diagonal[j] * q[j] + (j > 0 ? upper[j - 1] * q[j - 1] : 0.0);
  }
  return p;
}

Matrix KineticFactor::dense() const {
  const Eigen::Index m = diagonal.size();
  Matrix b = Matrix::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    b(i, i) = diagonal[i];
    if (i + 1 < m) b(i, i + 1) = upper[i];
  }
  return b;
}

std::pair<Vector, Vector> KineticFactor::normal_large() const {
  const Eigen::Index m = diagonal.size();
  Vector d(m), e(m - 1);
  for (Eigen::Index j = 0; j < m; ++j) {
    d[j] = diagonal[j] * diagonal[j] + (j > 0 ? upper[j - 1] * upper[j - 1] : 0.0);
    if (j + 1 < m) e[j] = diagonal[j] * upper[j];
  }
  return {d, e};
}

std::pair<Vector, Vector> KineticFactor::normal_small() const {
  const Eigen::Index m = diagonal.size();
  Vector d(m), e(m - 1);
  for (Eigen::Index i = 0; i < m; ++i) {
    d[i] = diagonal[i] * diagonal[i] + (i + 1 < m ? upper[i] * upper[i] : 0.0);
    if (i + 1 < m) e[i] = upper[i] * diagonal[i + 1];
  }
  return {d, e};
}

KineticFactor kinetic_factor(const RadialGrid& grid, int kappa) {
  if (kappa == 0) fail(ErrorCode::invalid_argument, "kappa must be nonzero");
  const auto m = static_cast<Eigen::Index>(grid.size());
  const double h = grid.step();
  const Vector& w = grid.weights();
  const Vector& wq = grid.midpoint_weights();
  const Vector& rm = grid.midpoints();
  const double lower = std::exp(-0.5 * kappa * h);
  const double higher = std::exp(0.5 * kappa * h);
  KineticFactor b{Vector(m), Vector::Zero(m)};
  for (Eigen::Index i = 0; i < m; ++i) {
    const double scale = std::sqrt(wq[i]) / (h * rm[i]);
    b.diagonal[i] = -lower * scale / std::sqrt(w[i]);
    if (i + 1 < m) b.upper[i] = higher * scale / std::sqrt(w[i + 1]);
  }
  return b;
}

ChannelOperator::ChannelOperator(OperatorKind kind, int channel, double speed_of_light, double shift,
                                 std::shared_ptr<const RadialGrid> grid, Vector diagonal,
                                 Vector off_diagonal)
    : kind_(kind),
      channel_(channel),
      c_(speed_of_light),
      shift_(shift),
      grid_(std::move(grid)),
      diagonal_(std::move(diagonal)),
      off_diagonal_(std::move(off_diagonal)) {}

void ChannelOperator::add_node_potential(const Vector& u, double scale) {
  const Eigen::Index m = u.size();
  if (relativistic()) {
    for (Eigen::Index i = 0; i < m; ++i) {
      diagonal_[2 * i] += scale * u[i];
      diagonal_[2 * i + 1] += scale * u[i];
    }
  } else {
    diagonal_ += scale * u;
    if (potential_.size() > 0) potential_ += scale * u;
  }
}

void ChannelOperator::add_exchange(ExchangeTerm term) { exchange_.push_back(std::move(term)); }

void ChannelOperator::add_rank_one(RankOneTerm term) { rank_one_.push_back(std::move(term)); }

void ChannelOperator::add_identity(double value) {
  diagonal_.array() += value;
  if (potential_.size() > 0) potential_.array() += value;
}

Vector ChannelOperator::to_natural(const Vector& block) const {
  if (!relativistic()) return block;
  const Eigen::Index m = block.size() / 2;
  Vector out(block.size());
  for (Eigen::Index i = 0; i < m; ++i) {
    out[2 * i] = block[i];
    out[2 * i + 1] = block[m + i];
  }
  return out;
}

Vector ChannelOperator::to_block(const Vector& natural) const {
  if (!relativistic()) return natural;
  const Eigen::Index m = natural.size() / 2;
  Vector out(natural.size());
  for (Eigen::Index i = 0; i < m; ++i) {
    out[i] = natural[2 * i];
    out[m + i] = natural[2 * i + 1];
  }
  return out;
}

Vector lumped_pair_density(const RadialGrid& grid, bool relativistic, const Vector& x, const Vector& y) {
  const auto m = static_cast<Eigen::Index>(grid.size());
  if (!relativistic) return x.cwiseProduct(y).cwiseQuotient(grid.weights());
  return (x.head(m).cwiseProduct(y.head(m)) + x.tail(m).cwiseProduct(y.tail(m)))
      .cwiseQuotient(grid.weights());
}

Vector ChannelOperator::pair_density(const Vector& x, const Vector& y) const {
  return lumped_pair_density(*grid_, relativistic(), x, y);
}

void ChannelOperator::compress(std::shared_ptr<const Matrix> basis, double complement_value) {
  if (basis->rows() != dimension()) {
    fail(ErrorCode::invalid_argument, "compress: projector and channel dimensions differ");
  }
  basis_ = std::move(basis);
  complement_value_ = complement_value;
}

Vector ChannelOperator::apply(const Vector& x) const {
  if (!basis_) return apply_uncompressed(x);
  const Matrix& u = *basis_;
  const Vector px = u * (u.transpose() * x);
  const Vector hpx = apply_uncompressed(px);
  return u * (u.transpose() * hpx) + complement_value_ * (x - px);
}

Vector ChannelOperator::apply_uncompressed(const Vector& x) const {
  const Eigen::Index n = dimension();
  Vector y(n);
  if (potential_.size() > 0) {
    y = 0.5 * kinetic_.apply_transpose(kinetic_.apply(x)) + potential_.cwiseProduct(x);
  } else {
    const Vector xn = to_natural(x);
    Vector yn(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      double v = diagonal_[i] * xn[i];
      if (i > 0) v += off_diagonal_[i - 1] * xn[i - 1];
      if (i + 1 < n) v += off_diagonal_[i] * xn[i + 1];
      yn[i] = v;
    }
    y = to_block(yn);
  }
  const auto m = static_cast<Eigen::Index>(grid_->size());
  for (const auto& term : exchange_) {
    const Vector u = term.kernel->potential(pair_density(x, term.orbital));
    if (relativistic()) {
      y.head(m) -= term.coefficient * u.cwiseProduct(term.orbital.head(m));
      y.tail(m) -= term.coefficient * u.cwiseProduct(term.orbital.tail(m));
    } else {
      y -= term.coefficient * u.cwiseProduct(term.orbital);
    }
  }
  for (const auto& term : rank_one_) {
    y += term.coefficient * term.vector.dot(x) * term.vector;
  }
  return y;
}

Matrix ChannelOperator::local_dense() const {
  const Eigen::Index n = dimension();
  Matrix natural = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    natural(i, i) = diagonal_[i];
    if (i + 1 < n) {
      natural(i, i + 1) = off_diagonal_[i];
      natural(i + 1, i) = off_diagonal_[i];
    }
  }
  if (!relativistic()) return natural;
  const Eigen::Index m = n / 2;
  Eigen::VectorXi perm(n);  // natural index of each block index
  for (Eigen::Index i = 0; i < m; ++i) {
    perm[i] = static_cast<int>(2 * i);
    perm[m + i] = static_cast<int>(2 * i + 1);
  }
  Matrix block(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) block(i, j) = natural(perm[i], perm[j]);
  }
  return block;
}

Matrix ChannelOperator::dense() const {
  Matrix a = local_dense();
  const auto m = static_cast<Eigen::Index>(grid_->size());
  const Vector& w = grid_->weights();
  std::map<const CoulombKernel*, Matrix> weighted;
  for (const auto& term : exchange_) {
    auto it = weighted.find(term.kernel.get());
    if (it == weighted.end()) it = weighted.emplace(term.kernel.get(), term.kernel->weighted_matrix()).first;
    const Matrix& s = it->second;
    // X = -coef G S G^T with G = [diag(phi_p / w); diag(phi_q / w)]
    const Eigen::Index parts = relativistic() ? 2 : 1;
    for (Eigen::Index bi = 0; bi < parts; ++bi) {
      const Vector gi = term.orbital.segment(bi * m, m).cwiseQuotient(w);
      for (Eigen::Index bj = 0; bj < parts; ++bj) {
        const Vector gj = term.orbital.segment(bj * m, m).cwiseQuotient(w);
        a.block(bi * m, bj * m, m, m).noalias() -=
            term.coefficient * (gi.asDiagonal() * s * gj.asDiagonal());
      }
    }
  }
  for (const auto& term : rank_one_) {
    a.noalias() += term.coefficient * term.vector * term.vector.transpose();
  }
  if (!basis_) return a;
  const Matrix& u = *basis_;
  const Matrix uau = u.transpose() * a * u;
  Matrix out = u * uau * u.transpose();
  out.noalias() -= complement_value_ * (u * u.transpose());
  out.diagonal().array() += complement_value_;
  return 0.5 * (out + out.transpose());
}

ChannelOperator dirac_channel_matrix(std::shared_ptr<const RadialGrid> grid, int kappa, double c,
                                     const RadialPotential& v) {
  if (kappa == 0) fail(ErrorCode::invalid_argument, "dirac_channel_matrix: kappa must be nonzero");
  if (!(c > 0.0)) fail(ErrorCode::invalid_argument, "dirac_channel_matrix: c must be positive");
  const auto m = static_cast<Eigen::Index>(grid->size());
  if (v.nodes.size() != m || v.midpoints.size() != m) {
    fail(ErrorCode::invalid_argument, "dirac_channel_matrix: potential not sampled on the grid");
  }
  const KineticFactor b = kinetic_factor(*grid, kappa);
  const double c2 = c * c;
  Vector d(2 * m), e(2 * m - 1);
  for (Eigen::Index i = 0; i < m; ++i) {
    d[2 * i] = v.nodes[i];
    d[2 * i + 1] = v.midpoints[i] - 2.0 * c2;
    e[2 * i] = c * b.diagonal[i];
    if (i + 1 < m) e[2 * i + 1] = c * b.upper[i];
  }
  return ChannelOperator(OperatorKind::dirac, kappa, c, c2, std::move(grid), std::move(d), std::move(e));
}

ChannelOperator schrodinger_channel_matrix(std::shared_ptr<const RadialGrid> grid, int l,
                                           const RadialPotential& v) {
  if (l < 0) fail(ErrorCode::invalid_argument, "schrodinger_channel_matrix: l must be nonnegative");
  const auto m = static_cast<Eigen::Index>(grid->size());
  if (v.nodes.size() != m) {
    fail(ErrorCode::invalid_argument, "schrodinger_channel_matrix: potential not sampled on the grid");
  }
  KineticFactor b = kinetic_factor(*grid, -l - 1);
  auto [d, e] = b.normal_large();
  d *= 0.5;
  e *= 0.5;
  d += v.nodes;
  ChannelOperator op(OperatorKind::schrodinger, l, 0.0, 0.0, std::move(grid), std::move(d), std::move(e));
  op.kinetic_ = std::move(b);
  op.potential_ = v.nodes;
  return op;
}

Vector scale_large(const RadialGrid& grid, const Vector& p) { return p.cwiseProduct(grid.weights().cwiseSqrt()); }
Vector scale_small(const RadialGrid& grid, const Vector& q) {
  return q.cwiseProduct(grid.midpoint_weights().cwiseSqrt());
}
Vector unscale_large(const RadialGrid& grid, const Vector& p) { return p.cwiseQuotient(grid.weights().cwiseSqrt()); }
Vector unscale_small(const RadialGrid& grid, const Vector& q) {
  return q.cwiseQuotient(grid.midpoint_weights().cwiseSqrt());
}

}  // namespace dfatoms
