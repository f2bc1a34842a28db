#include "scrapest/filters.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace scrapest::filter {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

void symmetrize(Eigen::MatrixXd& P) { P = ((P + P.transpose()) * 0.5).eval(); }

double observation_linear(const HeatRecord& heat) {
  if (!heat.f_steel) throw DomainError("heat has no f_steel; use predict_only");
  return heat.m_steel_kg * *heat.f_steel - heat.m_hm_kg * heat.f_hm;
}

Eigen::VectorXd augmented_mean(const NoiseSpec& spec) {
  Eigen::VectorXd q_bar(spec.augmented_dim());
  q_bar.head(spec.state_dim()) = spec.q;
  q_bar.tail(2) = *spec.q_c;
  return q_bar;
}

Eigen::VectorXd augmented_Q_diag(const NoiseSpec& spec) {
  Eigen::VectorXd Q_bar(spec.augmented_dim());
  Q_bar.head(spec.state_dim()) = spec.Q_diag;
  Q_bar.tail(2) = *spec.Qc_diag;
  return Q_bar;
}

GaussianBelief predict_from(const Eigen::VectorXd& mean_post, const Eigen::MatrixXd& cov_post,
                            double gamma, const Eigen::VectorXd& q_bar,
                            const Eigen::VectorXd& Q_bar_diag) {
  GaussianBelief next;
  next.mean = (1.0 - gamma) * mean_post + gamma * q_bar;
  next.cov = (1.0 - gamma) * (1.0 - gamma) * cov_post;
  next.cov.diagonal() += (gamma * gamma) * Q_bar_diag;
  symmetrize(next.cov);
  return next;
}

}  // namespace

Eigen::VectorXd SigmaPointSet::weighted_mean() const { return points * weights; }

Eigen::MatrixXd SigmaPointSet::weighted_covariance() const {
  const Eigen::VectorXd mean = weighted_mean();
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(dim(), dim());
  for (int i = 0; i < count(); ++i) {
    const Eigen::VectorXd d = points.col(i) - mean;
    cov.noalias() += weights[i] * d * d.transpose();
  }
  return cov;
}

SigmaPointSet sigma_points(const Eigen::VectorXd& a, const Eigen::MatrixXd& chol_lower,
                           double k) {
  const int m = static_cast<int>(a.size());
  if (chol_lower.rows() != m || chol_lower.cols() != m)
    throw DomainError("sigma_points: factor dimension mismatch");
  if (!(m + k > 0.0)) throw DomainError("sigma_points: need m + k > 0");

  SigmaPointSet set;
  set.k = k;
  set.points.resize(m, 2 * m + 1);
  set.weights.resize(2 * m + 1);
  const double spread = std::sqrt(m + k);
  set.points.col(0) = a;
  set.weights[0] = k / (m + k);
  const double w = 1.0 / (2.0 * (m + k));
  for (int i = 0; i < m; ++i) {
    const Eigen::VectorXd shift = spread * chol_lower.col(i);
    set.points.col(1 + i) = a + shift;
    set.points.col(1 + m + i) = a - shift;
    set.weights[1 + i] = w;
    set.weights[1 + m + i] = w;
  }
  return set;
}

CholeskyResult cholesky_psd(const Eigen::MatrixXd& P) {
  const int m = static_cast<int>(P.rows());
  if (P.cols() != m) throw DecompositionError("cholesky_psd: matrix not square");
  const double scale = std::max(P.cwiseAbs().maxCoeff(), 0.0);
  const double pivot_tol = 1e-14 * std::max(scale, 1.0);

  auto attempt = [&](double shift, Eigen::MatrixXd& L) -> bool {
    L.setZero(m, m);
    for (int j = 0; j < m; ++j) {
      double d = P(j, j) + shift - L.row(j).head(j).squaredNorm();
      if (d < -pivot_tol) return false;
      if (d <= pivot_tol) {
        // Semidefinite pivot: the rest of the column must vanish too.
        L(j, j) = 0.0;
        for (int i = j + 1; i < m; ++i) {
          const double off = P(i, j) - L.row(i).head(j).dot(L.row(j).head(j));
          if (std::abs(off) > std::sqrt(pivot_tol) * std::max(scale, 1.0)) return false;
          L(i, j) = 0.0;
        }
        continue;
      }
      L(j, j) = std::sqrt(d);
      for (int i = j + 1; i < m; ++i)
        L(i, j) = (P(i, j) - L.row(i).head(j).dot(L.row(j).head(j))) / L(j, j);
    }
    return true;
  };

  CholeskyResult result;
  if (attempt(0.0, result.lower)) return result;
  const double base = P.trace() / static_cast<double>(m);
  for (double delta : {1e-12, 1e-10, 1e-8}) {
    const double shift = delta * base;
    if (shift > 0.0 && attempt(shift, result.lower)) {
      result.jitter = shift;
      return result;
    }
  }
  std::ostringstream os;
  os << "matrix of dimension " << m << " not positive semidefinite within jitter 1e-8";
  throw DecompositionError(os.str());
}

StepResult kalman_step(const GaussianBelief& prior, const HeatRecord& heat,
                       const NoiseSpec& spec) {
  const int n = spec.state_dim();
  if (prior.dim() != n) throw DomainError("kalman_step: belief dimension mismatch");
  if (heat.scrap_mass_kg.size() != n) throw DomainError("kalman_step: heat dimension mismatch");

  const double y = observation_linear(heat);
  const Eigen::VectorXd& z = heat.scrap_mass_kg;  // observation row
  const Eigen::VectorXd pz = prior.cov * z;
  const double s = z.dot(pz) + spec.H;  // scalar innovation variance
  if (!(s > 1e-300)) throw NumericalError("innovation variance not positive");

  const Eigen::VectorXd gain = pz / s;
  const double v = y - z.dot(prior.mean);

  StepResult out;
  out.innovation = v;
  out.innovation_variance = s;
  out.posterior.mean = prior.mean + gain * v;
  out.posterior.cov = prior.cov - gain * pz.transpose();
  symmetrize(out.posterior.cov);
  out.next_prior =
      predict_from(out.posterior.mean, out.posterior.cov, spec.gamma, spec.q, spec.Q_diag);
  return out;
}

GaussianBelief predict_only(const GaussianBelief& prior, const NoiseSpec& spec) {
  if (prior.dim() == spec.state_dim())
    return predict_from(prior.mean, prior.cov, spec.gamma, spec.q, spec.Q_diag);
  if (prior.dim() == spec.augmented_dim() && spec.has_partition())
    return predict_from(prior.mean, prior.cov, spec.gamma, augmented_mean(spec),
                        augmented_Q_diag(spec));
  throw DomainError("predict_only: belief dimension matches neither plain nor augmented state");
}

StepResult ukf_step(const GaussianBelief& prior, const HeatRecord& heat, const NoiseSpec& spec,
                    double k, UkfDiagnostics* diag) {
  if (!spec.has_partition()) throw DomainError("ukf_step: NoiseSpec lacks q_c / Q_c");
  const int n = spec.state_dim();
  const int m = spec.augmented_dim();
  if (prior.dim() != m) throw DomainError("ukf_step: belief must cover the augmented state");
  if (heat.scrap_mass_kg.size() != n) throw DomainError("ukf_step: heat dimension mismatch");
  if (!heat.f_steel) throw DomainError("heat has no f_steel; use predict_only");
  if (!heat.f_feon_slag) throw DomainError("heat has no f_feon_slag");
  if (!(heat.m_steel_kg > 0.0)) throw DomainError("m_steel must be positive");

  const double y = heat.m_steel_kg * *heat.f_steel;
  const double f_feon = *heat.f_feon_slag;
  const double slag_ratio = heat.m_slag_kg / heat.m_steel_kg;

  auto observe = [&](const Eigen::VectorXd& x) {
    double ell = x[n] + x[n + 1] * f_feon;
    if (ell < 0.0) {
      // Reflect into the physical region for evaluation only.
      ell = -ell;
      if (diag) ++diag->clamped_sigma_points;
    }
    const double denom = 1.0 + ell * slag_ratio;
    return (heat.scrap_mass_kg.dot(x.head(n)) + heat.m_hm_kg * heat.f_hm) / denom;
  };

  const CholeskyResult chol = cholesky_psd(prior.cov);
  const SigmaPointSet pts = sigma_points(prior.mean, chol.lower, k);

  Eigen::VectorXd zs(pts.count());
  for (int i = 0; i < pts.count(); ++i) zs[i] = observe(pts.points.col(i));
  const double y_bar = zs.dot(pts.weights);

  Eigen::VectorXd p_xy = Eigen::VectorXd::Zero(m);
  double p_vv = spec.H;
  for (int i = 0; i < pts.count(); ++i) {
    const double dz = zs[i] - y_bar;
    p_xy.noalias() += pts.weights[i] * dz * (pts.points.col(i) - prior.mean);
    p_vv += pts.weights[i] * dz * dz;
  }
  if (!(p_vv > 1e-300)) throw NumericalError("innovation variance not positive");

  StepResult out;
  out.innovation = y - y_bar;
  out.innovation_variance = p_vv;
  const Eigen::VectorXd gain = p_xy / p_vv;
  out.posterior.mean = prior.mean + gain * out.innovation;
  out.posterior.cov = prior.cov - gain * p_xy.transpose();
  symmetrize(out.posterior.cov);
  out.next_prior = predict_from(out.posterior.mean, out.posterior.cov, spec.gamma,
                                augmented_mean(spec), augmented_Q_diag(spec));
  return out;
}

double predict_steel_fraction(const GaussianBelief& prior, const HeatRecord& heat,
                              const ElementSpec& element) {
  if (!(heat.m_steel_kg > 0.0)) throw DomainError("predict_steel_fraction: m_steel must be > 0");
  const int n = static_cast<int>(heat.scrap_mass_kg.size());
  if (!element.transfers_to_slag) {
    if (prior.dim() != n) throw DomainError("predict_steel_fraction: dimension mismatch");
    return (heat.scrap_mass_kg.dot(prior.mean) + heat.m_hm_kg * heat.f_hm) / heat.m_steel_kg;
  }
  if (prior.dim() != n + 2)
    throw DomainError("predict_steel_fraction: augmented belief required");
  if (!heat.f_feon_slag) throw DomainError("predict_steel_fraction: f_feon_slag required");
  const double ell = prior.mean[n] + prior.mean[n + 1] * *heat.f_feon_slag;
  const double denom = heat.m_steel_kg + heat.m_slag_kg * ell;
  if (!(denom > 0.0)) {
    std::ostringstream os;
    os << "heat " << heat.heat_index << ": prediction denominator " << denom << " <= 0";
    throw NumericalError(os.str());
  }
  return (heat.scrap_mass_kg.dot(prior.mean.head(n)) + heat.m_hm_kg * heat.f_hm) / denom;
}

GaussianBelief default_init(const NoiseSpec& spec, bool augmented) {
  GaussianBelief b;
  if (!augmented) {
    b.mean = spec.q;
    b.cov = spec.Q_diag.asDiagonal();
    return b;
  }
  if (!spec.has_partition()) throw DomainError("default_init: NoiseSpec lacks q_c / Q_c");
  b.mean = augmented_mean(spec);
  b.cov = augmented_Q_diag(spec).asDiagonal();
  return b;
}

FilterTrace run_filter(const std::vector<HeatRecord>& heats, const NoiseSpec& spec,
                       const ElementSpec& element, const GaussianBelief& init,
                       const RunOptions& opts) {
  spec.validate();
  const bool augmented = element.transfers_to_slag;
  if (augmented && !spec.has_partition())
    throw DomainError("run_filter: slag-partitioning element needs q_c / Q_c");
  const int expected_dim = augmented ? spec.augmented_dim() : spec.state_dim();
  if (init.dim() != expected_dim) throw DomainError("run_filter: init dimension mismatch");

  FilterTrace trace;
  trace.state_dim = expected_dim;
  trace.entries.reserve(heats.size());
  UkfDiagnostics diag;

  GaussianBelief belief = init;
  int last_index = 0;
  for (const auto& heat : heats) {
    if (heat.heat_index <= last_index)
      throw DomainError("run_filter: heats must be ordered by heat_index");
    last_index = heat.heat_index;

    TraceEntry e;
    e.heat_index = heat.heat_index;
    e.prior_mean = belief.mean;
    e.prior_cov_diag = belief.cov.diagonal();
    if (opts.keep_full_covariance) e.prior_cov = belief.cov;

    e.predicted_f_steel = predict_steel_fraction(belief, heat, element);
    e.negative_prediction = e.predicted_f_steel < 0.0;
    if (augmented) {
      const int n = spec.state_dim();
      e.predicted_numerator_kg =
          heat.scrap_mass_kg.dot(belief.mean.head(n)) + heat.m_hm_kg * heat.f_hm;
      e.predicted_denominator_kg =
          heat.m_steel_kg +
          heat.m_slag_kg * (belief.mean[n] + belief.mean[n + 1] * heat.f_feon_slag.value_or(0.0));
    } else {
      e.predicted_numerator_kg = kNan;
      e.predicted_denominator_kg = kNan;
    }

    if (heat.f_steel) {
      const StepResult step = augmented ? ukf_step(belief, heat, spec, opts.k, &diag)
                                        : kalman_step(belief, heat, spec);
      e.posterior_mean = step.posterior.mean;
      e.posterior_cov_diag = step.posterior.cov.diagonal();
      if (opts.keep_full_covariance) e.posterior_cov = step.posterior.cov;
      e.innovation = step.innovation;
      e.innovation_variance = step.innovation_variance;
      e.updated = true;
      belief = step.next_prior;
    } else {
      e.posterior_mean = belief.mean;
      e.posterior_cov_diag = belief.cov.diagonal();
      if (opts.keep_full_covariance) e.posterior_cov = belief.cov;
      e.innovation = kNan;
      e.innovation_variance = kNan;
      e.updated = false;
      belief = predict_only(belief, spec);
    }
    trace.entries.push_back(std::move(e));
  }
  trace.clamped_sigma_events = diag.clamped_sigma_points;
  return trace;
}

}  // namespace scrapest::filter
