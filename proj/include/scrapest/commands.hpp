#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "scrapest/baseline.hpp"
#include "scrapest/synthgen.hpp"
#include "scrapest/types.hpp"

namespace scrapest::cli {

/// How the NoiseSpec is derived, mirroring how the hyperparameters are
/// chosen in practice: pick the long-run spread first, then gamma, and
/// compute Q from them; H from the measurement-error budget.
struct NoiseRecipe {
  std::string mean_source = "literal";  // "literal" | "ols-init"
  std::optional<std::vector<double>> q_ppm;
  int ols_heats = 5000;
  double q_floor = 1e-7;  // floor for clamped OLS components feeding Beta matching

  std::optional<double> gamma;
  std::optional<double> half_life_heats;

  std::optional<double> p_inf_rel_sd;            // (P_inf)_ii = (rel_sd * q_i)^2
  std::optional<std::vector<double>> Q_diag_ppm2;  // literal alternative

  std::optional<double> H_g2;
  struct HInputs {
    double m_steel_t = 0, sd_f_steel_ppm = 0, m_hm_t = 0, sd_f_hm_ppm = 0;
  };
  std::optional<HInputs> H_inputs;

  std::optional<std::array<double, 2>> q_c;
  double p_c_inf_rel_sd = 0.01;  // (P_c_inf)_ii = (rel_sd * q_c_i)^2
  std::optional<std::array<double, 2>> Qc_diag;

  bool require_beta_feasible = true;
};

struct RunConfig {
  ElementSpec element{"Cu", false};
  int n_scrap = 45;
  NoiseRecipe noise;
  baseline::WindowConfig window;
  long burn_in = 5000;
  std::uint64_t seed = 1;
  double k = 3.0;
  std::string mode = "kalman";  // kalman | ukf | nnls

  int sim_heats = 20000;
  synth::SurrogateConfig surrogate;

  std::filesystem::path heats_csv;
  std::filesystem::path truth_csv;
  std::filesystem::path noise_spec_json;
  std::filesystem::path trace_csv;
  std::filesystem::path out_dir = ".";

  std::vector<std::string> series_components;  // scrap ids for plot-data export
  std::vector<double> sweep_multipliers = {0.5, 0.7, 1.0, 1.2, 1.5};
  std::string sweep_axis = "q";

  std::string config_dump;  // resolved config serialized for the manifest hash

  void validate() const;
};

RunConfig load_run_config(const std::filesystem::path& path);
std::string dump_run_config(const RunConfig& cfg);

/// Resolves the recipe into a concrete NoiseSpec. heats are needed only for
/// mean_source = "ols-init".
NoiseSpec resolve_noise_spec(const RunConfig& cfg, const std::vector<HeatRecord>* heats);

// Command entry points; each writes its outputs plus a manifest under
// cfg.out_dir and returns the paths written.
std::vector<std::string> cmd_derive_params(const RunConfig& cfg);
std::vector<std::string> cmd_simulate(const RunConfig& cfg);
std::vector<std::string> cmd_fit(const RunConfig& cfg);
std::vector<std::string> cmd_evaluate(const RunConfig& cfg);
std::vector<std::string> cmd_sweep(const RunConfig& cfg);

}  // namespace scrapest::cli
