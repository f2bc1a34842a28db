#include "scrapest/moments.hpp"

#include <cmath>
#include <sstream>

namespace scrapest {

double gamma_from_half_life(double half_life_heats) {
  if (!(half_life_heats > 0.0)) throw DomainError("half-life must be positive");
  return std::log(2.0) / half_life_heats;
}

Eigen::VectorXd stationary_covariance(double gamma, const Eigen::VectorXd& Q_diag) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw DomainError("gamma must lie in (0, 1]");
  return (gamma / (2.0 - gamma)) * Q_diag;
}

Eigen::VectorXd process_noise_from_stationary(double gamma, const Eigen::VectorXd& p_inf_diag) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw DomainError("gamma must lie in (0, 1]");
  return ((2.0 - gamma) / gamma) * p_inf_diag;
}

BetaParams beta_params_from_moments(double q, double Q, int index) {
  std::ostringstream os;
  if (!(q > 0.0 && q < 1.0)) {
    os << "Beta mean " << q << " outside (0, 1)";
    throw MomentMatchingError(os.str(), index);
  }
  if (!(Q > 0.0)) {
    os << "Beta variance " << Q << " must be positive";
    throw MomentMatchingError(os.str(), index);
  }
  BetaParams p;
  p.u = q * q * (1.0 - q) / Q - q;
  p.v = p.u / q - p.u;
  if (!(p.u > 0.0) || !(p.v > 0.0)) {
    os << "moments (q = " << q << ", Q = " << Q << ") infeasible: need Q < q(1-q) = "
       << q * (1.0 - q);
    if (index >= 0) os << " at component " << index;
    throw MomentMatchingError(os.str(), index);
  }
  return p;
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> propagate_moments(
    const Eigen::VectorXd& a1, const Eigen::MatrixXd& P1, double gamma,
    const Eigen::VectorXd& q, const Eigen::VectorXd& Q_diag, long steps) {
  if (a1.size() != q.size() || Q_diag.size() != q.size() || P1.rows() != a1.size() ||
      P1.cols() != a1.size())
    throw DomainError("propagate_moments: dimension mismatch");
  if (steps < 0) throw DomainError("propagate_moments: steps must be >= 0");
  if (steps == 0 || gamma == 0.0) return {a1, P1};

  const double r = 1.0 - gamma;
  const double rt = std::pow(r, static_cast<double>(steps));
  const double r2t = rt * rt;
  Eigen::VectorXd mean = rt * a1 + (1.0 - rt) * q;
  // 1 - r^2 = gamma (2 - gamma); exact even at gamma = 1.
  const double geom = (1.0 - r2t) / (gamma * (2.0 - gamma));
  Eigen::MatrixXd cov = r2t * P1;
  cov.diagonal() += (geom * gamma * gamma) * Q_diag;
  return {std::move(mean), std::move(cov)};
}

double estimate_obs_variance_linear(double m_steel_kg, double sd_f_steel,
                                    double m_hm_kg, double sd_f_hm) {
  if (m_steel_kg < 0.0 || sd_f_steel < 0.0 || m_hm_kg < 0.0 || sd_f_hm < 0.0)
    throw DomainError("observation-variance inputs must be >= 0");
  const double a = m_steel_kg * sd_f_steel;
  const double b = m_hm_kg * sd_f_hm;
  return a * a + b * b;
}

}  // namespace scrapest
