#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "scrapest/baseline.hpp"
#include "scrapest/filters.hpp"
#include "scrapest/synthgen.hpp"
#include "scrapest/types.hpp"

namespace scrapest::eval {

/// Numerator/denominator error statistics of the predicted-fraction
/// quotient, for slag-partitioning runs with ground truth.
struct NumDenStats {
  double num_mean_g = 0.0;
  double num_std_g = 0.0;
  double den_mean_t = 0.0;
  double den_std_t = 0.0;
  long n = 0;
};

struct ErrorSummary {
  double mean_ppm = 0.0;
  double std_ppm = 0.0;  // n-1 divisor
  long n = 0;
  long burn_in = 0;
  std::optional<NumDenStats> numden;
};

/// e_t = predicted f_steel - measured f_steel (fractions), for heats with
/// heat_index > burn_in that carry a measurement. Throws on misaligned
/// trace/heats.
std::vector<double> prediction_errors(const filter::FilterTrace& trace,
                                      const std::vector<HeatRecord>& heats, long burn_in);

/// Baseline analog; heats without an emitted estimate are skipped.
std::vector<double> prediction_errors(const std::vector<baseline::WindowEstimate>& estimates,
                                      const std::vector<HeatRecord>& heats, long burn_in);

/// Mean and n-1 standard deviation of the errors, reported in ppm.
/// Requires n >= 2.
ErrorSummary summarize(const std::vector<double>& errors_fraction, long burn_in);

/// Prior-mean numerator/denominator errors against the generated truth.
NumDenStats numden_errors(const filter::FilterTrace& trace, const synth::SyntheticDataset& ds,
                          long burn_in);

/// Standard deviation over time (heat_index > burn_in) of one component of
/// the posterior mean — how fast that scrap estimate moves.
double component_volatility_ppm(const filter::FilterTrace& trace, int component, long burn_in);

/// Time average of the posterior standard deviation of one component (the
/// other reading of "std of the estimated fraction"); both are reported.
double mean_posterior_sd_ppm(const filter::FilterTrace& trace, int component, long burn_in);

/// Fraction of (heat, component) pairs past burn-in where the truth lies
/// within posterior mean +- 2 sqrt(P_ii).
double band_coverage(const filter::FilterTrace& trace,
                     const std::vector<Eigen::VectorXd>& truth_alpha, long burn_in);

enum class SweepAxis {
  kQ,              // scale q and the initial mean together
  kH,              // scale the observation variance
  kGammaFixedQ,    // scale gamma, Q unchanged
  kGammaFixedPinf, // scale gamma, Q recomputed from the base P_inf
  kQc,             // scale q_c and the initial partition mean
  kQcCov,          // scale Q_c
  kK,              // absolute sigma-point k (not a multiplier)
};

SweepAxis sweep_axis_from_string(const std::string& name);
std::string to_string(SweepAxis axis);

struct SweepOptions {
  long burn_in = 5000;
  double k = 3.0;
  int volatility_component = 35;  // 0-based catalog index
};

struct SweepRow {
  double multiplier = 1.0;
  ErrorSummary summary;
  double volatility_ppm = 0.0;
  double avg_posterior_sd_ppm = 0.0;
};

/// Reruns the filter on the dataset once per multiplier with the designated
/// hyperparameter scaled and everything else fixed. Rows come back in
/// multiplier order regardless of scheduling.
std::vector<SweepRow> misspecification_sweep(const synth::SyntheticDataset& ds,
                                             const NoiseSpec& base, SweepAxis axis,
                                             const std::vector<double>& multipliers,
                                             const SweepOptions& opts = {});

struct ExportOptions {
  std::vector<int> series_components;  // catalog indices for the long-format series
  long burn_in = 0;
};

/// Writes summary.csv (one row per labeled summary) and series.csv
/// (long format: series,t,value) with per-heat estimate/band/truth/usage
/// series for the selected components and the partition-coefficient series
/// when the trace is augmented. Values are serialized with 17 significant
/// digits so a re-parse reproduces them exactly.
void export_report(const std::filesystem::path& out_dir,
                   const std::vector<std::pair<std::string, ErrorSummary>>& summaries,
                   const filter::FilterTrace& trace, const std::vector<HeatRecord>& heats,
                   const ScrapCatalog& catalog,
                   const std::vector<Eigen::VectorXd>* truth_alpha,
                   const std::vector<Eigen::Vector2d>* truth_c, const ExportOptions& opts);

}  // namespace scrapest::eval
