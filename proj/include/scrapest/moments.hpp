#pragma once

#include <Eigen/Dense>

#include <utility>

#include "scrapest/types.hpp"

namespace scrapest {

/// gamma such that the state recursion halves its memory of the initial
/// value after `half_life_heats` heats: gamma = ln 2 / h.
double gamma_from_half_life(double half_life_heats);

/// Long-run covariance diagonal of the state recursion
/// alpha_{t+1} = (1-gamma) alpha_t + gamma eta_t:  P_inf = gamma/(2-gamma) Q.
Eigen::VectorXd stationary_covariance(double gamma, const Eigen::VectorXd& Q_diag);

/// Exact inverse of stationary_covariance: Q = ((2-gamma)/gamma) P_inf.
Eigen::VectorXd process_noise_from_stationary(double gamma, const Eigen::VectorXd& p_inf_diag);

struct BetaParams {
  double u = 0.0;
  double v = 0.0;
};

/// Shape parameters of the Beta distribution with mean q and variance Q:
///   u = q^2 (1-q) / Q - q,   v = u/q - u.
/// Requires Q < q(1-q); throws MomentMatchingError otherwise (index is the
/// component index when known, -1 for the scalar call).
BetaParams beta_params_from_moments(double q, double Q, int index = -1);

/// Mean and covariance of the state after `steps` applications of the
/// recursion, starting from (a1, P1):
///   a = (1-g)^t a1 + (1 - (1-g)^t) q
///   P = (1-g)^{2t} P1 + (1 - (1-g)^{2t}) / (1 - (1-g)^2) * g^2 Q
/// Valid for gamma in [0, 1]; steps = 0 returns the inputs unchanged.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> propagate_moments(
    const Eigen::VectorXd& a1, const Eigen::MatrixXd& P1, double gamma,
    const Eigen::VectorXd& q, const Eigen::VectorXd& Q_diag, long steps);

/// Observation-noise variance for the linear model, from the uncertainty of
/// the two measured fractions:  H = m_steel^2 sd_f_steel^2 + m_hm^2 sd_f_hm^2.
/// Masses in kg, sds as fractions; result in kg^2.
double estimate_obs_variance_linear(double m_steel_kg, double sd_f_steel,
                                    double m_hm_kg, double sd_f_hm);

}  // namespace scrapest
