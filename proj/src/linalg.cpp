#include "dfatoms/linalg.hpp"

#include <lapacke.h>

#include <algorithm>
#include <limits>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "dfatoms/error.hpp"

namespace dfatoms {

namespace {

void check_info(lapack_int info, const char* routine) {
  if (info != 0) {
    fail(ErrorCode::not_converged, std::string(routine) + " failed with info = " + std::to_string(info));
  }
}

}  // namespace

EigenSystem symmetric_eigen(const Matrix& a) {
  const auto n = static_cast<lapack_int>(a.rows());
  EigenSystem out{Vector(n), a};
  if (n == 0) return out;
  check_info(LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, out.vectors.data(), n, out.values.data()),
             "dsyevd");
  return out;
}

EigenSystem symmetric_eigen_window(const Matrix& a, double lo, double hi) {
  const auto n = static_cast<lapack_int>(a.rows());
  if (n == 0 || !(hi > lo)) return {Vector(0), Matrix(n, 0)};
  Matrix work = a;
  Vector w(n);
  Matrix z(n, n);
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(n));
  lapack_int found = 0;
  check_info(LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'V', 'L', n, work.data(), n, lo, hi, 0, 0, 0.0, &found,
                            w.data(), z.data(), n, support.data()),
             "dsyevr");
  return {w.head(found), z.leftCols(found)};
}

namespace {

// Inverse iteration at accurate eigenvalues; the tridiagonal solves are
// componentwise stable, so the vectors inherit the eigenvalue accuracy.
EigenSystem refine_vectors(const Vector& d, const Vector& e, const Vector& values) {
  const Eigen::Index n = d.size();
  const Eigen::Index found = values.size();
  EigenSystem out{values, Matrix(n, found)};
  for (Eigen::Index j = 0; j < found; ++j) {
    Vector x = Vector::LinSpaced(n, 1.0, 2.0);
    for (int it = 0; it < 3; ++it) {
      x = tridiagonal_solve(d, e, out.values[j], x);
      for (Eigen::Index k = 0; k < j; ++k) x -= out.vectors.col(k).dot(x) * out.vectors.col(k);
      x /= x.norm();
    }
    Eigen::Index at = 0;
    x.cwiseAbs().maxCoeff(&at);
    if (x[at] < 0) x = -x;
    out.vectors.col(j) = x;
  }
  return out;
}

}  // namespace

EigenSystem tridiagonal_eigen_window(const Vector& d, const Vector& e, double lo, double hi) {
  // The radial matrices are strongly graded (entries ~ 1/(h r_min)), so
  // QR/MRRR style solvers only reach an absolute accuracy eps*|T| that swamps
  // bound levels.  Bisection with a tiny absolute tolerance and inverse
  // iteration are componentwise stable and keep full relative accuracy.
  const auto n = static_cast<lapack_int>(d.size());
  if (n == 0 || !(hi > lo)) return {Vector(0), Matrix(n, 0)};
  Vector dd = d, ee = e;
  Vector w(n);
  std::vector<lapack_int> block(n), split(n);
  lapack_int found = 0, nsplit = 0;
  check_info(LAPACKE_dstebz('V', 'E', n, lo, hi, 0, 0, 2.0 * LAPACKE_dlamch('S'), dd.data(), ee.data(), &found,
                            &nsplit, w.data(), block.data(), split.data()),
             "dstebz");
  return refine_vectors(d, e, w.head(found));
}

Eigen::Index sturm_count(const Vector& d, const Vector& e, double x) {
  // number of eigenvalues below x from the signs of the LDL^T pivots
  const double tiny = std::numeric_limits<double>::min();
  Eigen::Index count = 0;
  double q = d[0] - x;
  for (Eigen::Index i = 0;;) {
    if (q < 0.0) ++count;
    if (++i == d.size()) break;
    if (q == 0.0) q = tiny;
    q = d[i] - x - e[i - 1] * e[i - 1] / q;
  }
  return count;
}

EigenSystem tridiagonal_eigen_range(const Vector& d, const Vector& e, Eigen::Index first, Eigen::Index last) {
  const auto n = static_cast<lapack_int>(d.size());
  first = std::max<Eigen::Index>(first, 0);
  last = std::min<Eigen::Index>(last, n - 1);
  if (last < first) return {Vector(0), Matrix(n, 0)};
  Vector dd = d, ee = e;
  Vector w(n);
  std::vector<lapack_int> block(n), split(n);
  lapack_int found = 0, nsplit = 0;
  check_info(LAPACKE_dstebz('I', 'E', n, 0.0, 0.0, static_cast<lapack_int>(first + 1),
                            static_cast<lapack_int>(last + 1), 2.0 * LAPACKE_dlamch('S'), dd.data(), ee.data(),
                            &found, &nsplit, w.data(), block.data(), split.data()),
             "dstebz");
  return refine_vectors(d, e, w.head(found));
}

EigenSystem tridiagonal_eigen(const Vector& d, const Vector& e) {
  const auto n = static_cast<lapack_int>(d.size());
  EigenSystem out{d, Matrix(n, n)};
  if (n == 0) return out;
  Vector ee(n);
  ee.head(n - 1) = e;
  ee[n - 1] = 0.0;
  check_info(LAPACKE_dstevd(LAPACK_COL_MAJOR, 'V', n, out.values.data(), ee.data(), out.vectors.data(), n),
             "dstevd");
  return out;
}

Vector tridiagonal_solve(const Vector& d, const Vector& e, double shift, const Vector& rhs) {
  const auto n = static_cast<lapack_int>(d.size());
  double s = shift;
  for (int attempt = 0; attempt < 8; ++attempt) {
    Vector diag = d.array() - s;
    Vector lower = e, upper = e;
    Vector y = rhs;
    const lapack_int info =
        LAPACKE_dgtsv(LAPACK_COL_MAJOR, n, 1, lower.data(), diag.data(), upper.data(), y.data(), n);
    if (info == 0 && y.allFinite()) return y;
    s += (1e-12 + 1e-14 * std::abs(s)) * (attempt + 1);
  }
  fail(ErrorCode::not_converged, "tridiagonal_solve: singular shifted system");
}

Vector bidiagonal_singular_values(const Vector& diagonal, const Vector& upper) {
  const auto n = static_cast<lapack_int>(diagonal.size());
  Vector d = diagonal;
  Vector e = upper.head(std::max<lapack_int>(n - 1, 0));
  double dummy = 0.0;
  check_info(LAPACKE_dbdsqr(LAPACK_COL_MAJOR, 'U', n, 0, 0, 0, d.data(), e.data(), &dummy, 1, &dummy, 1, &dummy, 1),
             "dbdsqr");
  return d;
}

double relative_asymmetry(const Matrix& a) {
  const double scale = a.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  return (a - a.transpose()).cwiseAbs().maxCoeff() / scale;
}

namespace {

// |T| |x| for the local tridiagonal part, in block layout
Vector local_magnitude(const ChannelOperator& op, const Vector& x, double theta) {
  const Vector xn = op.to_natural(x).cwiseAbs();
  const Vector& d = op.local_diagonal();
  const Vector& e = op.local_off_diagonal();
  const Eigen::Index n = xn.size();
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    v[i] = (std::abs(d[i]) + std::abs(theta)) * xn[i];
    if (i > 0) v[i] += std::abs(e[i - 1]) * xn[i - 1];
    if (i + 1 < n) v[i] += std::abs(e[i]) * xn[i + 1];
  }
  return op.to_block(v);
}

}  // namespace

double residual_rounding_floor(const ChannelOperator& op, const Vector& x, double theta) {
  const double eps = std::numeric_limits<double>::epsilon();
  if (const KineticFactor* b = op.factored_kinetic()) {
    const KineticFactor ab{b->diagonal.cwiseAbs(), b->upper.cwiseAbs()};
    const Vector bx = b->apply(x).cwiseAbs();
    const Vector ax = x.cwiseAbs();
    const Vector v = 0.5 * ab.apply_transpose(ab.apply(ax) + bx) +
                     (op.factored_potential().cwiseAbs().array() + std::abs(theta)).matrix().cwiseProduct(ax);
    return eps * v.norm();
  }
  const Matrix* u = op.compression_basis();
  if (u == nullptr) return eps * local_magnitude(op, x, theta).norm();
  // U U^T H U U^T x + alpha (1 - U U^T) x, each product taken in magnitudes;
  // the dense products sum over n terms (probabilistic sqrt(n) growth)
  const Matrix au = u->cwiseAbs();
  const Vector ax = x.cwiseAbs();
  const Vector px = (*u) * (u->transpose() * x);
  const Vector v = au * (au.transpose() * local_magnitude(op, px, theta)) +
                   std::abs(op.complement_value()) * (ax + au * (au.transpose() * ax));
  return eps * std::sqrt(static_cast<double>(x.size())) * v.norm();
}

ChannelSpectrum diagonalize_channel(const ChannelOperator& op) {
  const bool local_only = op.exchange_terms().empty() && op.rank_one_terms().empty() && !op.compressed();
  if (local_only) {
    EigenSystem es = tridiagonal_eigen(op.local_diagonal(), op.local_off_diagonal());
    Matrix v(es.vectors.rows(), es.vectors.cols());
    for (Eigen::Index j = 0; j < v.cols(); ++j) v.col(j) = op.to_block(es.vectors.col(j));
    return {es.values, v, op.shift()};
  }
  EigenSystem es = symmetric_eigen(op.dense());
  return {es.values, es.vectors, op.shift()};
}

namespace {

ChannelSpectrum take_lowest(EigenSystem es, int count, double shift, const char* what) {
  if (es.values.size() < count) {
    fail(ErrorCode::no_bound_state, std::string(what) + ": only " + std::to_string(es.values.size()) +
                                        " eigenvalues in the window, " + std::to_string(count) + " required");
  }
  return {es.values.head(count), es.vectors.leftCols(count), shift};
}

// Orthogonalise x against the columns of basis (two passes), return the norm left.
double orthogonalize(const Matrix& basis, Eigen::Index used, Vector& x) {
  for (int pass = 0; pass < 2; ++pass) {
    if (used > 0) x -= basis.leftCols(used) * (basis.leftCols(used).transpose() * x);
  }
  return x.norm();
}

// Rough rounding level of ||A x - theta x|| for the graded local part.  Real
// cancellation usually lands well below it; it is only used to accept a
// stagnated iteration.
ChannelSpectrum davidson(const ChannelOperator& op, int count, double lo, double hi, const Matrix* guess,
                         double tolerance) {
  const Eigen::Index n = op.dimension();
  const Vector& td = op.local_diagonal();
  const Vector& te = op.local_off_diagonal();
  const Eigen::Index max_basis = std::min<Eigen::Index>(n, std::max<Eigen::Index>(8 * count + 16, 40));

  Matrix basis(n, max_basis);
  Matrix image(n, max_basis);
  Eigen::Index used = 0;
  auto push = [&](Vector x) {
    if (used >= max_basis) return false;
    const double before = x.norm();
    if (before == 0.0) return false;
    const double after = orthogonalize(basis, used, x);
    if (after < 1e-8 * before) return false;
    basis.col(used) = x / after;
    image.col(used) = op.apply(basis.col(used));
    ++used;
    return true;
  };

  if (guess != nullptr) {
    for (Eigen::Index j = 0; j < guess->cols(); ++j) push(guess->col(j));
  }
  {
    // seeds from the local (tridiagonal) part; exchange only perturbs them
    // lowest local states above the window floor; exchange can pull states
    // into the window that the local part alone leaves unbound
    const double pad = 0.05 * (hi - lo) + 1.0;
    const Eigen::Index below = sturm_count(td, te, lo - pad);
    EigenSystem seeds = tridiagonal_eigen_range(td, te, below, below + count + 3);
    const Eigen::Index want = std::min<Eigen::Index>(seeds.values.size(), count + 4);
    for (Eigen::Index j = 0; j < want && used < max_basis / 2; ++j) push(op.to_block(seeds.vectors.col(j)));
  }
  if (used < count) {
    fail(ErrorCode::no_bound_state, "lowest_in_window: too few states near the window to seed the solver");
  }

  double best = std::numeric_limits<double>::infinity();
  int stalled = 0;
  for (int iter = 0; iter < 500; ++iter) {
    Matrix g = basis.leftCols(used).transpose() * image.leftCols(used);
    g = 0.5 * (g + g.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> small(g);
    std::vector<Eigen::Index> picked;
    for (Eigen::Index j = 0; j < used && static_cast<int>(picked.size()) < count; ++j) {
      const double theta = small.eigenvalues()[j];
      if (theta > lo && theta <= hi) picked.push_back(j);
    }
    if (static_cast<int>(picked.size()) < count) {
      fail(ErrorCode::no_bound_state, "lowest_in_window: fewer than the required eigenvalues in the window");
    }
    Matrix x(n, count), ax(n, count);
    Vector theta(count);
    for (int k = 0; k < count; ++k) {
      const Vector y = small.eigenvectors().col(picked[k]);
      x.col(k) = basis.leftCols(used) * y;
      ax.col(k) = image.leftCols(used) * y;
      theta[k] = small.eigenvalues()[picked[k]];
    }
    std::vector<Vector> corrections;
    double worst = 0.0;
    for (int k = 0; k < count; ++k) {
      const Vector r = ax.col(k) - theta[k] * x.col(k);
      const double rn = r.norm();
      worst = std::max(worst, rn);
      if (rn <= tolerance) continue;
      const Vector xn = op.to_natural(x.col(k));
      const Vector rn_nat = op.to_natural(r);
      Vector t = tridiagonal_solve(td, te, theta[k], rn_nat);
      const Vector u = tridiagonal_solve(td, te, theta[k], xn);
      const double denom = xn.dot(u);
      if (std::abs(denom) > 1e-300) t -= (xn.dot(t) / denom) * u;
      corrections.push_back(op.to_block(t));
    }
    if (corrections.empty()) return {theta, x, op.shift()};
    if (worst < 0.5 * best) {
      best = worst;
      stalled = 0;
    } else if (++stalled >= 5) {
      double floor = 0.0;
      for (int k = 0; k < count; ++k) floor = std::max(floor, residual_rounding_floor(op, x.col(k), theta[k]));
      if (worst <= 100.0 * floor) return {theta, x, op.shift()};
      if (stalled >= 20) fail(ErrorCode::not_converged, "lowest_in_window: Davidson stagnated");
    }
    if (used + static_cast<Eigen::Index>(corrections.size()) > max_basis) {
      // restart on the current Ritz vectors plus a few neighbours
      const Eigen::Index keep = std::min<Eigen::Index>(used, count + 4);
      Matrix nb(n, keep);
      const Eigen::Index first = picked.front();
      for (Eigen::Index j = 0; j < keep; ++j) {
        const Eigen::Index idx = std::min<Eigen::Index>(first + j, used - 1);
        nb.col(j) = basis.leftCols(used) * small.eigenvectors().col(idx);
      }
      used = 0;
      for (Eigen::Index j = 0; j < keep; ++j) push(nb.col(j));
    }
    bool grew = false;
    for (auto& c : corrections) grew = push(c) || grew;
    if (!grew) {
      double floor = 0.0;
      for (int k = 0; k < count; ++k) floor = std::max(floor, residual_rounding_floor(op, x.col(k), theta[k]));
      if (worst <= std::max(1e3 * tolerance, 100.0 * floor)) return {theta, x, op.shift()};
      fail(ErrorCode::not_converged, "lowest_in_window: Davidson stagnated");
    }
  }
  fail(ErrorCode::not_converged, "lowest_in_window: Davidson iteration cap reached");
}

}  // namespace

ChannelSpectrum lowest_in_window(const ChannelOperator& op, int count, double lo, double hi, const Matrix* guess,
                                 EigenMethod method, double tolerance) {
  if (count <= 0) return {Vector(0), Matrix(op.dimension(), 0), op.shift()};
  const bool local_only = op.exchange_terms().empty() && op.rank_one_terms().empty() && !op.compressed();
  if (local_only) {
    EigenSystem es = tridiagonal_eigen_window(op.local_diagonal(), op.local_off_diagonal(), lo, hi);
    Matrix v(es.vectors.rows(), es.vectors.cols());
    for (Eigen::Index j = 0; j < v.cols(); ++j) v.col(j) = op.to_block(es.vectors.col(j));
    return take_lowest({es.values, v}, count, op.shift(), "lowest_in_window");
  }
  // a compressed operator is dense already and its local part is no
  // preconditioner for it
  if (method == EigenMethod::automatic) method = op.compressed() ? EigenMethod::dense : EigenMethod::iterative;
  if (method == EigenMethod::dense) {
    return take_lowest(symmetric_eigen_window(op.dense(), lo, hi), count, op.shift(), "lowest_in_window");
  }
  return davidson(op, count, lo, hi, guess, tolerance);
}

}  // namespace dfatoms
