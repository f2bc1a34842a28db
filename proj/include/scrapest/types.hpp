#pragma once

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace scrapest {

inline constexpr std::string_view kVersion = "0.1.0";

// ppm <-> dimensionless fraction. All internal state is SI (kg, fractions);
// files and reports use ppm / g^2 / tonnes at the boundary.
inline constexpr double kPpm = 1e-6;
inline double to_ppm(double fraction) { return fraction * 1e6; }
inline double from_ppm(double ppm) { return ppm * 1e-6; }

class ScrapestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public ScrapestError {
 public:
  using ScrapestError::ScrapestError;
};

// Beta moment matching infeasible for some component.
class MomentMatchingError : public ScrapestError {
 public:
  MomentMatchingError(const std::string& msg, int index)
      : ScrapestError(msg), index_(index) {}
  int index() const { return index_; }

 private:
  int index_;
};

class DecompositionError : public ScrapestError {
 public:
  using ScrapestError::ScrapestError;
};

class NumericalError : public ScrapestError {
 public:
  using ScrapestError::ScrapestError;
};

class GenerationError : public ScrapestError {
 public:
  using ScrapestError::ScrapestError;
};

class SolverError : public ScrapestError {
 public:
  using ScrapestError::ScrapestError;
};

class ParseError : public ScrapestError {
 public:
  using ScrapestError::ScrapestError;
};

class IoError : public ScrapestError {
 public:
  using ScrapestError::ScrapestError;
};

/// One chemical element. transfers_to_slag selects the observation model:
/// false -> the element stays out of the slag and the element mass in steel
/// is linear in the scrap fractions; true -> the element partitions between
/// steel and slag and the observation function is non-linear.
struct ElementSpec {
  std::string element_id;
  bool transfers_to_slag = false;
};

/// Ordered list of scrap-type identifiers. The ordering is the canonical
/// index order of every length-N_s vector in the toolkit.
struct ScrapCatalog {
  std::vector<std::string> scrap_ids;
  std::vector<std::string> display_names;  // optional, same length when set

  int size() const { return static_cast<int>(scrap_ids.size()); }
  void validate() const;

  static ScrapCatalog numbered(int n_scrap);
};

/// One production heat. Masses in kg, fractions dimensionless.
/// f_steel may be absent (pure prediction); f_feon_slag is only needed for
/// slag-partitioning elements.
struct HeatRecord {
  int heat_index = 0;  // 1-based, strictly increasing within a stream
  Eigen::VectorXd scrap_mass_kg;
  double m_hm_kg = 0.0;
  double f_hm = 0.0;
  double m_steel_kg = 0.0;
  std::optional<double> f_steel;
  double m_slag_kg = 0.0;
  std::optional<double> f_feon_slag;

  void validate(int n_scrap) const;
};

/// Gaussian state belief: mean fractions (optionally augmented with the two
/// partition-coefficient parameters at the tail) and covariance.
struct GaussianBelief {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;

  int dim() const { return static_cast<int>(mean.size()); }

  /// Checks symmetry (1e-12 relative) and positive semidefiniteness
  /// (smallest eigenvalue >= -1e-10 * trace). Throws DomainError.
  void validate(double sym_rel_tol = 1e-12, double psd_tol = 1e-10) const;
};

/// Affine partition coefficient: ell(f_feon) = c1 + c2 * f_feon, the ratio
/// of the element fraction in slag to the fraction in steel.
struct PartitionModel {
  double c1 = 0.0;
  double c2 = 0.0;

  double ell(double f_feon) const { return c1 + c2 * f_feon; }
};

/// Process/observation noise specification for one element.
///   gamma  - state correlation parameter in (0, 1]
///   q      - process-noise mean (long-run state mean), fractions
///   Q_diag - diagonal of the process-noise covariance (fractions^2)
///   H      - observation-noise variance, kg^2 of element mass
///   q_c / Qc_diag - optional partition-parameter analogs (augmented state)
struct NoiseSpec {
  double gamma = 0.0;
  Eigen::VectorXd q;
  Eigen::VectorXd Q_diag;
  double H = 0.0;
  std::optional<Eigen::Vector2d> q_c;
  std::optional<Eigen::Vector2d> Qc_diag;

  int state_dim() const { return static_cast<int>(q.size()); }
  int augmented_dim() const { return state_dim() + 2; }
  bool has_partition() const { return q_c.has_value() && Qc_diag.has_value(); }

  /// Long-run state covariance diagonal, gamma/(2-gamma) * Q.
  Eigen::VectorXd p_inf_diag() const;
  Eigen::VectorXd p_c_inf_diag() const;

  /// Structural checks: gamma in (0,1], nonnegative diagonals, matching
  /// dimensions. Throws DomainError.
  void validate() const;

  /// Eager feasibility check for Beta moment matching: Q_ii < q_i(1 - q_i)
  /// for every component. Call before any Beta sampling is requested.
  /// Throws MomentMatchingError naming the first offending index.
  void validate_beta_feasible() const;

  /// Builds a NoiseSpec from dense matrices, rejecting non-diagonal Q/Q_c.
  static NoiseSpec from_matrices(double gamma, const Eigen::VectorXd& q,
                                 const Eigen::MatrixXd& Q, double H);
};

}  // namespace scrapest
