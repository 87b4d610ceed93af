#include "qme/lp.hpp"

#include <limits>
#include <vector>

namespace qme {

bool is_feasible(const Matrix& A, const Vector& b, double tol) {
  require_same_size(A.rows(), b.size(), "is_feasible");
  const Eigen::Index m = A.rows();
  const Eigen::Index n = A.cols();
  const Eigen::Index rhs = n + m;

  // Tableau [A | I | b] with one artificial per row; last row holds the
  // reduced costs of the phase-I objective (sum of artificials).
  Matrix t = Matrix::Zero(m + 1, n + m + 1);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double sign = b(i) < 0.0 ? -1.0 : 1.0;
    t.row(i).head(n) = sign * A.row(i);
    t(i, n + i) = 1.0;
    t(i, rhs) = sign * b(i);
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    t.row(m).head(n) -= t.row(i).head(n);
    t(m, rhs) -= t(i, rhs);
  }

  std::vector<Eigen::Index> basis(m);
  for (Eigen::Index i = 0; i < m; ++i) basis[i] = n + i;

  constexpr double kPivotEps = 1e-12;
  // Bland's rule: terminates without cycling.
  const int max_iter = 50 * static_cast<int>(n + m) + 100;
  for (int iter = 0; iter < max_iter; ++iter) {
    Eigen::Index enter = -1;
    for (Eigen::Index j = 0; j < n + m; ++j) {
      if (t(m, j) < -kPivotEps) {
        enter = j;
        break;
      }
    }
    if (enter < 0) break;

    Eigen::Index leave = -1;
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < m; ++i) {
      if (t(i, enter) > kPivotEps) {
        const double ratio = t(i, rhs) / t(i, enter);
        if (ratio < best - kPivotEps ||
            (ratio <= best + kPivotEps && leave >= 0 &&
             basis[i] < basis[leave])) {
          best = ratio;
          leave = i;
        }
      }
    }
    if (leave < 0) break;  // unbounded direction cannot occur in phase I

    t.row(leave) /= t(leave, enter);
    for (Eigen::Index i = 0; i <= m; ++i) {
      if (i != leave && t(i, enter) != 0.0) {
        t.row(i) -= t(i, enter) * t.row(leave);
      }
    }
    basis[leave] = enter;
  }
  return -t(m, rhs) <= tol;
}

}  // namespace qme
