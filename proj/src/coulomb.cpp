#include "dfatoms/coulomb.hpp"

#include <cmath>

#include "dfatoms/error.hpp"

namespace dfatoms {

CoulombKernel::CoulombKernel(std::shared_ptr<const RadialGrid> grid, int k)
    : grid_(std::move(grid)), k_(k) {
  if (k < 0) fail(ErrorCode::invalid_argument, "coulomb kernel: negative multipole order");
  const double h = grid_->step();
  const double h2 = h * h;
  const double two_k1 = 2.0 * k + 1.0;
  const double kk = static_cast<double>(k) * k + k + 1.0;
  // Jump terms: -(h^2/12) J1 + (h^4/720) J3 with
  //   J1 = (2k+1) f,  J3 = (2k+1) [3 (f'' + f') + (k^2+k+1) f]   (t-derivatives)
  diag_coeff_ = -h2 / 12.0 * two_k1 + h2 * h2 / 720.0 * two_k1 * kk;
  stencil_coeff_ = h2 * h2 / 720.0 * two_k1 * 3.0;
}

Vector CoulombKernel::potential(const Vector& f) const {
  const RadialGrid& g = *grid_;
  const Eigen::Index m = f.size();
  const Vector& r = g.nodes();
  const Vector& w = g.weights();
  const double h = g.step();
  const double decay_in = std::exp(-h * k_);
  const double decay_out = std::exp(-h * (k_ + 1));

  Vector u(m);
  // inner[i] = sum_{j<=i} w_j f_j (r_j/r_i)^k
  double inner = 0.0;
  Vector inner_sum(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    inner = inner * decay_in + w[i] * f[i];
    inner_sum[i] = inner;
  }
  // outer[i] = sum_{j>i} w_j f_j (r_i/r_j)^{k+1}
  double outer = 0.0;
  for (Eigen::Index i = m - 1; i >= 0; --i) {
    u[i] = (inner_sum[i] + outer) / r[i];
    outer = (outer + w[i] * f[i]) * decay_out;
  }

  // Kink corrections, assembled as (1/w_i) (S_corr f)_i with S_corr symmetric.
  const double hinv2 = 1.0 / (h * h);
  const Vector& rm = g.midpoints();  // rm[i] = r_{i+1/2}
  for (Eigen::Index i = 0; i < m; ++i) {
    double lap = 0.0;  // h * (r_{i+1/2}(f_{i+1}-f_i) - r_{i-1/2}(f_i-f_{i-1})) / h^2
    if (i + 1 < m) lap += rm[i] * (f[i + 1] - f[i]);
    else lap -= rm[i] * f[i];
    if (i > 0) lap -= rm[i - 1] * (f[i] - f[i - 1]);
    else lap -= r[0] * std::exp(-0.5 * h) * f[i];
    u[i] += diag_coeff_ * f[i] + stencil_coeff_ * h * hinv2 * lap / w[i];
  }
  return u;
}

double CoulombKernel::pair_energy(const Vector& f, const Vector& g) const {
  return grid_->weights().cwiseProduct(g).dot(potential(f));
}

Matrix CoulombKernel::weighted_matrix() const {
  const RadialGrid& g = *grid_;
  const auto m = static_cast<Eigen::Index>(g.size());
  const Vector& r = g.nodes();
  const Vector& w = g.weights();
  const Vector& rm = g.midpoints();
  const double h = g.step();
  Matrix s(m, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index i = j; i < m; ++i) {
      // r_j <= r_i
      const double kern = std::pow(r[j] / r[i], k_) / r[i];
      s(i, j) = w[i] * w[j] * kern;
      s(j, i) = s(i, j);
    }
  }
  const double c = stencil_coeff_ * h / (h * h);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double left = i > 0 ? rm[i - 1] : r[0] * std::exp(-0.5 * h);
    s(i, i) += w[i] * diag_coeff_ - c * (rm[i] + left);
    if (i + 1 < m) {
      s(i, i + 1) += c * rm[i];
      s(i + 1, i) += c * rm[i];
    }
  }
  return s;
}

Vector slater_y(int k, const Vector& f, const RadialGrid& grid) {
  if (f.size() != static_cast<Eigen::Index>(grid.size())) {
    fail(ErrorCode::invalid_argument, "slater_y: sample count does not match the grid");
  }
  CoulombKernel kernel(std::make_shared<const RadialGrid>(grid), k);
  return kernel.potential(f).cwiseProduct(grid.nodes());
}

std::shared_ptr<const CoulombKernel> KernelCache::get(int k) {
  if (k < 0) fail(ErrorCode::invalid_argument, "kernel cache: negative multipole order");
  if (static_cast<std::size_t>(k) >= kernels_.size()) kernels_.resize(static_cast<std::size_t>(k) + 1);
  auto& slot = kernels_[static_cast<std::size_t>(k)];
  if (!slot) slot = std::make_shared<const CoulombKernel>(grid_, k);
  return slot;
}

}  // namespace dfatoms
