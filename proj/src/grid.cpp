#include "dfatoms/grid.hpp"

#include <cmath>
#include <sstream>

#include "dfatoms/error.hpp"

namespace dfatoms {

RadialGrid::RadialGrid(GridKind kind, double r_min, double r_max, std::size_t size) : kind_(kind) {
  if (!(r_min > 0.0)) {
    fail(ErrorCode::invalid_argument, "grid: r_min must be positive");
  }
  if (!(r_max > r_min)) {
    fail(ErrorCode::invalid_argument, "grid: r_max must exceed r_min");
  }
  if (size < 16) {
    std::ostringstream msg;
    msg << "grid: at least 16 nodes required, got " << size;
    fail(ErrorCode::invalid_argument, msg.str());
  }
  const auto m = static_cast<Eigen::Index>(size);
  const double log_span = std::log(r_max / r_min);
  step_ = log_span / static_cast<double>(m - 1);

  nodes_.resize(m);
  midpoints_.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    nodes_[i] = r_min * std::exp(step_ * static_cast<double>(i));
    midpoints_[i] = r_min * std::exp(step_ * (static_cast<double>(i) + 0.5));
  }
  nodes_[0] = r_min;
  nodes_[m - 1] = r_max;

  // Interior: h r_i.  The ends absorb the exact trapezoid defect for e^t,
  // (h/2)coth(h/2) - 1, so that sum(w) == r_max - r_min.
  const double em1 = std::expm1(step_);
  weights_ = step_ * nodes_;
  weights_[0] = nodes_[0] * (step_ * (em1 + 1.0) / em1 - 1.0);
  weights_[m - 1] = nodes_[m - 1] * (1.0 - step_ / em1);
  midpoint_weights_ = step_ * midpoints_;
}

RadialGrid build_grid(GridKind kind, double r_min, double r_max, std::size_t size) {
  return RadialGrid(kind, r_min, r_max, size);
}

RadialGrid GridSpec::build(double nuclear_charge) const {
  const double lo = r_min > 0.0 ? r_min : 1e-6 / nuclear_charge;
  return RadialGrid(GridKind::exponential, lo, r_max, size);
}

}  // namespace dfatoms
