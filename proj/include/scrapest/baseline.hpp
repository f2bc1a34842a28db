#pragma once

#include <Eigen/Dense>

#include <vector>

#include "scrapest/types.hpp"

namespace scrapest::baseline {

struct WindowConfig {
  int window = 2000;       // heats per sliding window
  int min_rows = 0;        // usable rows required; 0 means window / 2
  double fixed_ell = 10.0; // constant partition coefficient for the linearization
  int stride = 1;          // emit an estimate every `stride` heats
  double ridge_rel = 1e-10;

  int effective_min_rows() const { return min_rows > 0 ? min_rows : window / 2; }
  void validate() const;
};

struct NnlsResult {
  Eigen::VectorXd x;
  double kkt_residual = 0.0;  // max violated stationarity component
  int iterations = 0;
};

/// Minimizes ||X b - y||_2 subject to b >= 0 by an active-set sweep on the
/// normal equations (Lawson-Hanson style). On return the stationarity
/// residual satisfies kkt_residual <= 1e-8 ||X^T y||_inf; exceeding the
/// iteration cap throws SolverError with diagnostics.
NnlsResult nnls_solve(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

/// Same solver on precomputed G = X^T X and b = X^T y. `kkt_scale` is the
/// magnitude the KKT gate is relative to (pass ||X^T y||_inf).
NnlsResult nnls_solve_gram(const Eigen::MatrixXd& G, const Eigen::VectorXd& b,
                           double kkt_scale);

/// Per-heat regression target: the element mass attributed to scrap.
/// Linear elements: m_steel f_steel - m_hm f_hm. Slag-partitioning elements
/// (constant-ell linearization): f_steel (m_steel + m_slag ell) - m_hm f_hm.
double observation_target(const HeatRecord& heat, const ElementSpec& element, double fixed_ell);

struct WindowEstimate {
  int heat_index = 0;
  Eigen::VectorXd alpha;
  double predicted_f_steel = 0.0;
  std::vector<std::uint8_t> unidentifiable;  // per component, column-norm check
};

/// Sliding-window NNLS over an ordered heat stream: for each emission heat
/// the fit uses the `window` preceding heats (rows lacking f_steel are
/// skipped; fewer than min_rows usable rows emits nothing). The first
/// estimate lands on the heat after `window` heats of history.
///
/// OpenMP kernel: work is split into fixed 256-position chunks, each chunk
/// rebuilding its Gram matrix from scratch and sliding within, so results
/// do not depend on the thread count.
std::vector<WindowEstimate> windowed_nnls(const std::vector<HeatRecord>& heats,
                                          const ElementSpec& element, const WindowConfig& cfg);

/// Reference implementation: one scratch Gram per emission, no threading.
/// Kept for testing and benchmarked against the kernel.
std::vector<WindowEstimate> windowed_nnls_serial(const std::vector<HeatRecord>& heats,
                                                 const ElementSpec& element,
                                                 const WindowConfig& cfg);

struct OlsInitResult {
  Eigen::VectorXd q;  // negative components clamped to 0
  bool rank_deficient = false;
  int rank = 0;
};

/// Ordinary least squares over the given heats (same row construction as
/// windowed_nnls), negatives clamped to zero. Rank-deficient designs get the
/// minimum-norm solution and a flag the caller should surface as a warning.
OlsInitResult ols_init(const std::vector<HeatRecord>& heats, const ElementSpec& element,
                       double fixed_ell = 10.0);

}  // namespace scrapest::baseline
