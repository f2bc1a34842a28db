#pragma once

// Independent oracle for the linear filter: builds the exact joint Gaussian
// of (alpha_1..alpha_T, y_1..y_T) under the recursion
//   alpha_{t+1} = (1-gamma) alpha_t + gamma eta_t,   eta_t ~ N(q, Q)
//   y_t = m_t . alpha_t + eps_t,                     eps_t ~ N(0, H)
// and conditions alpha_t on y_{1:t} by Schur complement. Deliberately does
// not share any code with the filter implementation.

#include <Eigen/Dense>

#include <vector>

#include "scrapest/types.hpp"

namespace test_oracle {

struct JointGaussianModel {
  Eigen::VectorXd a1;
  Eigen::MatrixXd P1;
  double gamma = 0.0;
  Eigen::VectorXd q;
  Eigen::VectorXd Q_diag;
  double H = 0.0;
  std::vector<Eigen::VectorXd> obs_rows;  // m_t per heat
};

struct ExactPosterior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

/// Filtered posteriors of alpha_t given y_{1:t} for every t.
inline std::vector<ExactPosterior> exact_filtered_posteriors(
    const JointGaussianModel& model, const std::vector<double>& y) {
  const int n = static_cast<int>(model.a1.size());
  const int T = static_cast<int>(y.size());
  const double r = 1.0 - model.gamma;

  // Marginal moments of alpha_t and pairwise covariances:
  // Cov(alpha_s, alpha_t) = r^{t-s} Var(alpha_s) for t >= s.
  std::vector<Eigen::VectorXd> mean(T);
  std::vector<Eigen::MatrixXd> var(T);
  mean[0] = model.a1;
  var[0] = model.P1;
  for (int t = 1; t < T; ++t) {
    mean[t] = r * mean[t - 1] + model.gamma * model.q;
    var[t] = r * r * var[t - 1];
    var[t].diagonal() += model.gamma * model.gamma * model.Q_diag;
  }
  auto cross = [&](int s, int t) -> Eigen::MatrixXd {  // Cov(alpha_s, alpha_t)
    if (s <= t) return var[s] * std::pow(r, t - s);
    return std::pow(r, s - t) * var[t];
  };

  // Observation moments.
  Eigen::VectorXd y_mean(T);
  Eigen::MatrixXd y_cov(T, T);
  for (int s = 0; s < T; ++s) {
    y_mean[s] = model.obs_rows[static_cast<std::size_t>(s)].dot(mean[s]);
    for (int t = 0; t < T; ++t) {
      y_cov(s, t) = model.obs_rows[static_cast<std::size_t>(s)]
                        .dot(cross(s, t) * model.obs_rows[static_cast<std::size_t>(t)]);
      if (s == t) y_cov(s, t) += model.H;
    }
  }

  const Eigen::VectorXd y_vec = Eigen::Map<const Eigen::VectorXd>(y.data(), T);
  std::vector<ExactPosterior> out(static_cast<std::size_t>(T));
  for (int t = 0; t < T; ++t) {
    const int k = t + 1;  // condition on y_1..y_t
    Eigen::MatrixXd cov_ay(n, k);
    for (int s = 0; s < k; ++s)
      cov_ay.col(s) = cross(t, s) * model.obs_rows[static_cast<std::size_t>(s)];
    const Eigen::MatrixXd Syy = y_cov.topLeftCorner(k, k);
    const Eigen::VectorXd resid = y_vec.head(k) - y_mean.head(k);
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(Syy);
    out[static_cast<std::size_t>(t)].mean = mean[t] + cov_ay * ldlt.solve(resid);
    out[static_cast<std::size_t>(t)].cov =
        var[t] - cov_ay * ldlt.solve(cov_ay.transpose());
  }
  return out;
}

}  // namespace test_oracle
