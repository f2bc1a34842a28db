#pragma once

// Brute-force oracle for nonnegative least squares: enumerate every subset
// of coordinates as a candidate support, solve the unconstrained LS on that
// face, keep feasible candidates and take the lowest residual. Exact for
// small n; independent of the production solver.

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <limits>

namespace test_oracle {

inline Eigen::VectorXd nnls_enumerate(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  const int n = static_cast<int>(X.cols());
  Eigen::VectorXd best = Eigen::VectorXd::Zero(n);
  double best_resid = y.squaredNorm();

  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    std::vector<int> cols;
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) cols.push_back(i);
    Eigen::MatrixXd Xs(X.rows(), static_cast<long>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) Xs.col(static_cast<long>(c)) = X.col(cols[c]);
    const Eigen::VectorXd bs =
        Xs.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(y);
    if ((bs.array() < -1e-12).any()) continue;
    const double resid = (Xs * bs - y).squaredNorm();
    if (resid < best_resid - 1e-14 * std::max(1.0, best_resid)) {
      best_resid = resid;
      best.setZero();
      for (std::size_t c = 0; c < cols.size(); ++c) best[cols[c]] = std::max(0.0, bs[static_cast<long>(c)]);
    }
  }
  return best;
}

}  // namespace test_oracle
