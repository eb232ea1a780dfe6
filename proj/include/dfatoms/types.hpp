#pragma once

#include <Eigen/Dense>

namespace dfatoms {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// CODATA 2018 inverse fine-structure constant, the speed of light in atomic units.
inline constexpr double kSpeedOfLight = 137.035999084;

}  // namespace dfatoms
