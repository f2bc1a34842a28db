#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

#include "scrapest/types.hpp"

namespace scrapest::filter {

/// Deterministic sample set representing a Gaussian: 2m+1 points with
/// weights summing to 1, reproducing the source mean and covariance.
struct SigmaPointSet {
  Eigen::MatrixXd points;   // m x (2m+1); column 0 is the center
  Eigen::VectorXd weights;  // length 2m+1
  double k = 3.0;

  int dim() const { return static_cast<int>(points.rows()); }
  int count() const { return static_cast<int>(points.cols()); }
  Eigen::VectorXd weighted_mean() const;
  Eigen::MatrixXd weighted_covariance() const;
};

/// Center point weighted k/(m+k); the 2m points a +- sqrt(m+k) * A_col(i)
/// weighted 1/(2(m+k)). Requires m + k > 0.
SigmaPointSet sigma_points(const Eigen::VectorXd& a, const Eigen::MatrixXd& chol_lower,
                           double k);

struct CholeskyResult {
  Eigen::MatrixXd lower;
  double jitter = 0.0;  // diagonal shift actually applied, 0 when clean
};

/// Cholesky factorization tolerant of semidefinite input. Exactly singular
/// PSD matrices factor with zero jitter; slightly indefinite ones retry with
/// an escalating diagonal shift delta * trace(P)/m, delta in {1e-12, 1e-10,
/// 1e-8}. Throws DecompositionError if the largest shift still fails.
CholeskyResult cholesky_psd(const Eigen::MatrixXd& P);

/// One filter step: measurement update followed by the state prediction.
struct StepResult {
  GaussianBelief posterior;
  GaussianBelief next_prior;
  double innovation = 0.0;           // kg of element mass
  double innovation_variance = 0.0;  // kg^2
};

/// Linear measurement update with the nonzero-mean prediction:
///   y = m_steel f_steel - m_hm f_hm,  Z = scrap masses (row)
///   K = P Z^T / (Z P Z^T + H)
///   a' = (1-gamma) a_post + gamma q,  P' = (1-gamma)^2 P_post + gamma^2 Q.
StepResult kalman_step(const GaussianBelief& prior, const HeatRecord& heat,
                       const NoiseSpec& spec);

/// Prediction only (no measurement): a' = (1-gamma) a + gamma q_bar,
/// P' = (1-gamma)^2 P + gamma^2 Q_bar, where (q_bar, Q_bar) are the plain or
/// augmented noise moments depending on the belief dimension.
GaussianBelief predict_only(const GaussianBelief& prior, const NoiseSpec& spec);

/// Per-run counters for the unscented update.
struct UkfDiagnostics {
  long clamped_sigma_points = 0;  // sigma points evaluated with |ell|
};

/// Unscented measurement update over the augmented state [alpha, c1, c2]:
/// sigma points through
///   Z(x) = (m . alpha + m_hm f_hm) / (1 + (c1 + c2 f_feon) m_slag/m_steel),
/// then the standard cross-covariance gain, followed by the same
/// nonzero-mean prediction with blockdiag(Q, Q_c).
/// A sigma point with negative partition coefficient ell is evaluated with
/// |ell| (reflection into the valid region; beliefs untouched) and counted.
StepResult ukf_step(const GaussianBelief& prior, const HeatRecord& heat, const NoiseSpec& spec,
                    double k, UkfDiagnostics* diag = nullptr);

/// Steel-fraction prediction from a prior belief (never uses the heat's own
/// f_steel). Linear: (m . a + m_hm f_hm) / m_steel. Slag-partitioning:
/// (m . a_alpha + m_hm f_hm) / (m_steel + m_slag (c1 + c2 f_feon)) with the
/// prior means for alpha and c.
double predict_steel_fraction(const GaussianBelief& prior, const HeatRecord& heat,
                              const ElementSpec& element);

/// Per-heat record of a filter run. predicted_f_steel is always formed from
/// the prior, before the heat's measurement is seen.
struct TraceEntry {
  int heat_index = 0;
  Eigen::VectorXd prior_mean;
  Eigen::VectorXd prior_cov_diag;
  Eigen::VectorXd posterior_mean;
  Eigen::VectorXd posterior_cov_diag;
  std::optional<Eigen::MatrixXd> prior_cov;      // kept when requested
  std::optional<Eigen::MatrixXd> posterior_cov;  // kept when requested
  double predicted_f_steel = 0.0;
  double innovation = 0.0;           // NaN on prediction-only heats
  double innovation_variance = 0.0;  // NaN on prediction-only heats
  bool updated = false;
  bool negative_prediction = false;
  // Non-linear runs: prior-mean numerator (kg) and denominator (kg) of the
  // predicted-fraction quotient; NaN for linear runs.
  double predicted_numerator_kg = 0.0;
  double predicted_denominator_kg = 0.0;
};

struct FilterTrace {
  std::vector<TraceEntry> entries;
  long clamped_sigma_events = 0;
  int state_dim = 0;

  int size() const { return static_cast<int>(entries.size()); }
};

struct RunOptions {
  double k = 3.0;                     // sigma-point spread
  bool keep_full_covariance = false;  // store full P per heat (small runs)
};

/// Runs the filter selected by element.transfers_to_slag over an ordered
/// heat stream: record prior and predicted fraction, then update (heats
/// without f_steel take the prediction-only path).
FilterTrace run_filter(const std::vector<HeatRecord>& heats, const NoiseSpec& spec,
                       const ElementSpec& element, const GaussianBelief& init,
                       const RunOptions& opts = {});

/// Default initial beliefs: a1 = q, P1 = Q for the linear filter;
/// a1 = [q, q_c], P1 = blockdiag(Q, Q_c) for the augmented one.
GaussianBelief default_init(const NoiseSpec& spec, bool augmented);

}  // namespace scrapest::filter
