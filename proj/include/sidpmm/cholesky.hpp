// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cmath>

#include <Eigen/Core>

namespace sidpmm {

// In-place rank-one update of a lower-triangular Cholesky factor:
// L L^T  ->  L L^T + v v^T. O(n^2) via Givens-style row sweeps.
inline void chol_rank_one_update(Eigen::MatrixXd& L, Eigen::VectorXd v) {
  const Eigen::Index n = L.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    double r = std::hypot(L(i, i), v(i));
    double c = r / L(i, i);
    double s = v(i) / L(i, i);
    L(i, i) = r;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      L(j, i) = (L(j, i) + s * v(j)) / c;
      v(j) = c * v(j) - s * L(j, i);
    }
  }
}

// In-place rank-one downdate: L L^T -> L L^T - v v^T. Returns false when the
// result would not be positive definite; L is then left in an unspecified
// state and must be recomputed by the caller.
inline bool chol_rank_one_downdate(Eigen::MatrixXd& L, Eigen::VectorXd v) {
  const Eigen::Index n = L.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    double d = (L(i, i) - v(i)) * (L(i, i) + v(i));
    if (d <= 0.0) return false;
    double r = std::sqrt(d);
    double c = r / L(i, i);
    double s = v(i) / L(i, i);
    L(i, i) = r;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      L(j, i) = (L(j, i) - s * v(j)) / c;
      v(j) = c * v(j) - s * L(j, i);
    }
  }
  return true;
}

// log |L L^T| = 2 sum_i log L_ii.
inline double chol_log_det(const Eigen::MatrixXd& L) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < L.rows(); ++i) s += std::log(L(i, i));
  return 2.0 * s;
}

}  // namespace sidpmm
