#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <vector>

#include "scrapest/types.hpp"

namespace scrapest::synth {

/// A generated benchmark dataset: heats with f_steel filled in from the
/// ground truth plus observation noise, alongside the truth itself.
struct SyntheticDataset {
  ScrapCatalog catalog;
  ElementSpec element;
  std::vector<HeatRecord> heats;
  std::vector<Eigen::VectorXd> truth_alpha;
  std::vector<Eigen::Vector2d> truth_c;  // empty for linear elements
  std::uint64_t seed = 0;
  NoiseSpec noise;

  int n_heats() const { return static_cast<int>(heats.size()); }
};

/// One draw of the process noise: independent components, component i
/// distributed Beta(u_i, v_i) with mean q_i and variance Q_ii. Components
/// with Q_ii = 0 degenerate to q_i exactly.
Eigen::VectorXd sample_beta_vector(const Eigen::VectorXd& q, const Eigen::VectorXd& Q_diag,
                                   std::mt19937_64& rng);

/// State trajectory alpha_1..alpha_T with alpha_1 given and
/// alpha_{t+1} = (1-gamma) alpha_t + gamma eta_t, eta_t Beta-distributed.
std::vector<Eigen::VectorXd> generate_state_trajectory(const Eigen::VectorXd& alpha1,
                                                       double gamma, const Eigen::VectorXd& q,
                                                       const Eigen::VectorXd& Q_diag,
                                                       int n_heats, std::mt19937_64& rng);

/// Partition-parameter trajectory c_1..c_T with c_1 = c1 and the same
/// recursion driven by normal noise with mean q_c, covariance Q_c.
std::vector<Eigen::Vector2d> generate_partition_trajectory(const Eigen::Vector2d& c1,
                                                           double gamma,
                                                           const Eigen::Vector2d& q_c,
                                                           const Eigen::Vector2d& Qc_diag,
                                                           int n_heats, std::mt19937_64& rng);

/// Fills f_steel in-place for a linear element and returns the noisy
/// observations y_t = m_t . alpha_t + eps_t, eps_t ~ N(0, H).
/// f_steel is stored as (m_t . alpha_t + m_hm f_hm + eps_t) / m_steel, so a
/// consumer recomputing y from the record reproduces y_t exactly.
std::vector<double> synthesize_linear(const std::vector<Eigen::VectorXd>& truth_alpha,
                                      std::vector<HeatRecord>& heats, double H,
                                      std::mt19937_64& rng);

/// Non-linear analog: the element mass reaching the steel is
///   (m_t . alpha_t + m_hm f_hm) / (1 + ell_t m_slag / m_steel),
/// ell_t = c_{1,t} + c_{2,t} f_feon_t; y_t adds N(0, H) noise and
/// f_steel = y_t / m_steel.
std::vector<double> synthesize_nonlinear(const std::vector<Eigen::VectorXd>& truth_alpha,
                                         const std::vector<Eigen::Vector2d>& truth_c,
                                         std::vector<HeatRecord>& heats, double H,
                                         std::mt19937_64& rng);

/// Seeded surrogate for production heat masses, for users without real
/// records. Scrap usage is sparse: each type is active over a few windows
/// of the horizon and included with some probability per heat while active;
/// masses are log-normal. When n_scrap >= 36, type 36 (1-based) is active
/// only in the first half of the horizon, giving every dataset one type
/// that goes quiet — useful when studying behavior on unused types.
struct SurrogateConfig {
  int n_heats = 20000;
  double hot_metal_median_kg = 280e3;
  double hot_metal_log_sd = 0.02;
  double f_hm_median = 20e-6;
  double f_hm_log_sd = 0.20;
  double scrap_mass_median_kg = 7e3;
  double scrap_mass_log_sd = 0.45;
  double steel_yield = 0.93;
  double slag_median_kg = 35e3;
  double slag_log_sd = 0.10;
  double f_feon_mean = 0.25;
  double f_feon_sd = 0.03;
};

std::vector<HeatRecord> surrogate_heats(const SurrogateConfig& cfg, int n_scrap,
                                        std::mt19937_64& rng);

/// Representative long-run mean fractions per scrap type, anchored at the
/// published values for types 01, 02 and 45 and filled log-uniformly in
/// between by a fixed-seed engine (stable across runs and dataset seeds).
Eigen::VectorXd default_mean_fractions(const std::string& element_id, int n_scrap);

/// Full generation recipe: trajectories + observations against supplied
/// heats (masses only; f_steel is overwritten). Streams are derived from
/// `seed` per RngStream so that the state draw does not depend on whether
/// the partition stream is used.
struct GeneratorInputs {
  ScrapCatalog catalog;
  ElementSpec element;
  NoiseSpec noise;               // validated for Beta feasibility here
  std::vector<HeatRecord> heats; // masses; f_steel ignored on input
  std::uint64_t seed = 0;
};

SyntheticDataset generate(const GeneratorInputs& in);

}  // namespace scrapest::synth
