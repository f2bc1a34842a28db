#include "scrapest/commands.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>

#include "scrapest/csv.hpp"
#include "scrapest/evalkit.hpp"
#include "scrapest/filters.hpp"
#include "scrapest/io.hpp"
#include "scrapest/moments.hpp"
#include "scrapest/rng.hpp"

namespace scrapest::cli {

using nlohmann::json;

void RunConfig::validate() const {
  if (element.element_id.empty()) throw DomainError("config: element id is empty");
  if (n_scrap < 1) throw DomainError("config: n_scrap must be >= 1");
  if (mode != "kalman" && mode != "ukf" && mode != "nnls")
    throw DomainError("config: mode must be kalman, ukf or nnls");
  if (noise.gamma.has_value() == noise.half_life_heats.has_value())
    throw DomainError("config: exactly one of gamma and half_life_heats must be given");
  if (noise.p_inf_rel_sd.has_value() == noise.Q_diag_ppm2.has_value())
    throw DomainError("config: exactly one of p_inf_rel_sd and Q_diag_ppm2 must be given");
  if (noise.H_g2.has_value() == noise.H_inputs.has_value())
    throw DomainError("config: exactly one of H_g2 and H_inputs must be given");
  window.validate();
}

namespace {

template <typename T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

template <typename T>
void maybe_opt(const json& j, const char* key, std::optional<T>& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config " + path.string());
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }

  RunConfig cfg;
  try {
    if (j.contains("element")) {
      const auto& e = j.at("element");
      maybe(e, "id", cfg.element.element_id);
      maybe(e, "transfers_to_slag", cfg.element.transfers_to_slag);
    }
    maybe(j, "n_scrap", cfg.n_scrap);
    maybe(j, "burn_in", cfg.burn_in);
    maybe(j, "seed", cfg.seed);
    maybe(j, "k", cfg.k);
    maybe(j, "mode", cfg.mode);

    if (j.contains("noise")) {
      const auto& n = j.at("noise");
      auto& r = cfg.noise;
      maybe(n, "mean_source", r.mean_source);
      maybe_opt(n, "q_ppm", r.q_ppm);
      maybe(n, "ols_heats", r.ols_heats);
      maybe(n, "q_floor", r.q_floor);
      maybe_opt(n, "gamma", r.gamma);
      maybe_opt(n, "half_life_heats", r.half_life_heats);
      maybe_opt(n, "p_inf_rel_sd", r.p_inf_rel_sd);
      maybe_opt(n, "Q_diag_ppm2", r.Q_diag_ppm2);
      maybe_opt(n, "H_g2", r.H_g2);
      if (n.contains("H_inputs")) {
        NoiseRecipe::HInputs hi;
        const auto& h = n.at("H_inputs");
        maybe(h, "m_steel_t", hi.m_steel_t);
        maybe(h, "sd_f_steel_ppm", hi.sd_f_steel_ppm);
        maybe(h, "m_hm_t", hi.m_hm_t);
        maybe(h, "sd_f_hm_ppm", hi.sd_f_hm_ppm);
        r.H_inputs = hi;
      }
      maybe_opt(n, "q_c", r.q_c);
      maybe(n, "p_c_inf_rel_sd", r.p_c_inf_rel_sd);
      maybe_opt(n, "Qc_diag", r.Qc_diag);
      maybe(n, "require_beta_feasible", r.require_beta_feasible);
    }

    if (j.contains("window")) {
      const auto& w = j.at("window");
      maybe(w, "window", cfg.window.window);
      maybe(w, "min_rows", cfg.window.min_rows);
      maybe(w, "fixed_ell", cfg.window.fixed_ell);
      maybe(w, "stride", cfg.window.stride);
    }

    if (j.contains("simulate")) {
      const auto& s = j.at("simulate");
      maybe(s, "n_heats", cfg.sim_heats);
      auto& g = cfg.surrogate;
      maybe(s, "hot_metal_median_kg", g.hot_metal_median_kg);
      maybe(s, "f_hm_median_ppm", g.f_hm_median);
      if (s.contains("f_hm_median_ppm")) g.f_hm_median *= kPpm;
      maybe(s, "scrap_mass_median_kg", g.scrap_mass_median_kg);
      maybe(s, "steel_yield", g.steel_yield);
      maybe(s, "slag_median_kg", g.slag_median_kg);
      maybe(s, "f_feon_mean", g.f_feon_mean);
      maybe(s, "f_feon_sd", g.f_feon_sd);
    }

    if (j.contains("io")) {
      const auto& io = j.at("io");
      std::string s;
      maybe(io, "heats_csv", s); if (!s.empty()) cfg.heats_csv = s; s.clear();
      maybe(io, "truth_csv", s); if (!s.empty()) cfg.truth_csv = s; s.clear();
      maybe(io, "noise_spec_json", s); if (!s.empty()) cfg.noise_spec_json = s; s.clear();
      maybe(io, "trace_csv", s); if (!s.empty()) cfg.trace_csv = s; s.clear();
      maybe(io, "out_dir", s); if (!s.empty()) cfg.out_dir = s;
    }

    maybe(j, "series_components", cfg.series_components);
    if (j.contains("sweep")) {
      const auto& s = j.at("sweep");
      maybe(s, "axis", cfg.sweep_axis);
      maybe(s, "multipliers", cfg.sweep_multipliers);
    }
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }

  cfg.config_dump = j.dump();
  return cfg;
}

std::string dump_run_config(const RunConfig& cfg) {
  if (!cfg.config_dump.empty()) return cfg.config_dump;
  json j;
  j["element"] = {{"id", cfg.element.element_id},
                  {"transfers_to_slag", cfg.element.transfers_to_slag}};
  j["seed"] = cfg.seed;
  j["mode"] = cfg.mode;
  j["burn_in"] = cfg.burn_in;
  return j.dump();
}

namespace {

ScrapCatalog catalog_for(const RunConfig& cfg) { return ScrapCatalog::numbered(cfg.n_scrap); }

std::filesystem::path default_path(const RunConfig& cfg, const std::filesystem::path& given,
                                   const char* name) {
  return given.empty() ? cfg.out_dir / name : given;
}

}  // namespace

NoiseSpec resolve_noise_spec(const RunConfig& cfg, const std::vector<HeatRecord>* heats) {
  cfg.validate();
  const auto& r = cfg.noise;
  NoiseSpec spec;

  if (r.mean_source == "literal") {
    Eigen::VectorXd q_ppm;
    if (r.q_ppm) {
      q_ppm = Eigen::Map<const Eigen::VectorXd>(r.q_ppm->data(),
                                                static_cast<long>(r.q_ppm->size()));
      q_ppm *= kPpm;
    } else {
      q_ppm = synth::default_mean_fractions(cfg.element.element_id, cfg.n_scrap);
    }
    spec.q = q_ppm;
  } else if (r.mean_source == "ols-init") {
    if (!heats) throw DomainError("ols-init mean source needs a heats file");
    const long rows = std::min<long>(r.ols_heats, static_cast<long>(heats->size()));
    std::vector<HeatRecord> head(heats->begin(), heats->begin() + rows);
    const auto ols = baseline::ols_init(head, cfg.element, cfg.window.fixed_ell);
    if (ols.rank_deficient)
      std::cerr << "warning: OLS design rank " << ols.rank << " < " << head.front().scrap_mass_kg.size()
                << "; minimum-norm solution used\n";
    spec.q = ols.q.cwiseMax(r.q_floor);
  } else {
    throw DomainError("unknown mean_source: " + r.mean_source);
  }

  spec.gamma = r.gamma ? *r.gamma : gamma_from_half_life(*r.half_life_heats);

  if (r.p_inf_rel_sd) {
    const Eigen::VectorXd p_inf = (*r.p_inf_rel_sd * spec.q.array()).square();
    spec.Q_diag = process_noise_from_stationary(spec.gamma, p_inf);
  } else {
    spec.Q_diag = Eigen::Map<const Eigen::VectorXd>(r.Q_diag_ppm2->data(),
                                                    static_cast<long>(r.Q_diag_ppm2->size())) * 1e-12;
  }

  spec.H = r.H_g2 ? *r.H_g2 * 1e-6
                  : estimate_obs_variance_linear(r.H_inputs->m_steel_t * 1e3,
                                                 r.H_inputs->sd_f_steel_ppm * kPpm,
                                                 r.H_inputs->m_hm_t * 1e3,
                                                 r.H_inputs->sd_f_hm_ppm * kPpm);

  if (cfg.element.transfers_to_slag || r.q_c) {
    const std::array<double, 2> qc = r.q_c.value_or(std::array<double, 2>{9.7, 0.01});
    spec.q_c = Eigen::Vector2d(qc[0], qc[1]);
    if (r.Qc_diag) {
      spec.Qc_diag = Eigen::Vector2d((*r.Qc_diag)[0], (*r.Qc_diag)[1]);
    } else {
      const Eigen::Vector2d pc_inf = (r.p_c_inf_rel_sd * spec.q_c->array()).square();
      spec.Qc_diag = Eigen::Vector2d(process_noise_from_stationary(spec.gamma, pc_inf));
    }
  }

  spec.validate();
  if (r.require_beta_feasible) spec.validate_beta_feasible();
  return spec;
}

std::vector<std::string> cmd_derive_params(const RunConfig& cfg) {
  std::optional<io::LoadedHeats> loaded;
  if (cfg.noise.mean_source == "ols-init") loaded = io::load_heats(cfg.heats_csv);
  const NoiseSpec spec = resolve_noise_spec(cfg, loaded ? &loaded->heats : nullptr);

  const auto path = default_path(cfg, cfg.noise_spec_json, "noise_spec.json");
  io::save_noise_spec(path, spec, cfg.seed);
  io::write_manifest(cfg.out_dir, "derive-params", dump_run_config(cfg), cfg.seed,
                     {path.string()});
  return {path.string()};
}

std::vector<std::string> cmd_simulate(const RunConfig& cfg) {
  synth::GeneratorInputs in;
  in.element = cfg.element;
  in.seed = cfg.seed;

  if (!cfg.heats_csv.empty() && std::filesystem::exists(cfg.heats_csv)) {
    auto loaded = io::load_heats(cfg.heats_csv);
    in.catalog = std::move(loaded.catalog);
    in.heats = std::move(loaded.heats);
  } else {
    in.catalog = catalog_for(cfg);
    synth::SurrogateConfig sc = cfg.surrogate;
    sc.n_heats = cfg.sim_heats;
    auto rng = make_engine(cfg.seed, RngStream::kMasses);
    in.heats = synth::surrogate_heats(sc, cfg.n_scrap, rng);
  }
  in.noise = resolve_noise_spec(cfg, &in.heats);

  const synth::SyntheticDataset ds = synth::generate(in);

  const auto heats_path = cfg.out_dir / "heats.csv";
  const auto truth_path = cfg.out_dir / "truth.csv";
  const auto noise_path = cfg.out_dir / "noise_spec.json";
  io::save_heats(heats_path, ds.heats, ds.catalog);
  io::save_truth(truth_path, ds.truth_alpha, ds.truth_c, ds.catalog);
  io::save_noise_spec(noise_path, ds.noise, ds.seed);
  std::vector<std::string> outputs = {heats_path.string(), truth_path.string(),
                                      noise_path.string()};
  io::write_manifest(cfg.out_dir, "simulate", dump_run_config(cfg), cfg.seed, outputs);
  return outputs;
}

std::vector<std::string> cmd_fit(const RunConfig& cfg) {
  auto loaded = io::load_heats(cfg.heats_csv);

  NoiseSpec spec;
  if (cfg.mode != "nnls") {
    if (!cfg.noise_spec_json.empty() && std::filesystem::exists(cfg.noise_spec_json))
      spec = io::load_noise_spec(cfg.noise_spec_json);
    else
      spec = resolve_noise_spec(cfg, &loaded.heats);
    if (spec.state_dim() != loaded.catalog.size())
      throw DomainError("noise spec dimension does not match the heats file");
  }

  std::vector<std::string> outputs;
  if (cfg.mode == "nnls") {
    const auto estimates = baseline::windowed_nnls(loaded.heats, cfg.element, cfg.window);
    const auto path = default_path(cfg, cfg.trace_csv, "nnls_trace.csv");
    io::save_baseline_estimates(path, estimates, loaded.catalog);
    outputs.push_back(path.string());
  } else {
    const bool augmented = cfg.mode == "ukf";
    if (augmented != cfg.element.transfers_to_slag)
      throw DomainError("mode " + cfg.mode + " does not match the element's observation model");
    filter::RunOptions opts;
    opts.k = cfg.k;
    const auto trace = filter::run_filter(loaded.heats, spec, cfg.element,
                                          filter::default_init(spec, augmented), opts);
    const auto path = default_path(cfg, cfg.trace_csv, "trace.csv");
    io::save_filter_trace(path, trace, loaded.catalog);
    outputs.push_back(path.string());
  }
  io::write_manifest(cfg.out_dir, "fit", dump_run_config(cfg), cfg.seed, outputs);
  return outputs;
}

std::vector<std::string> cmd_evaluate(const RunConfig& cfg) {
  auto loaded = io::load_heats(cfg.heats_csv);
  std::optional<io::LoadedTruth> truth;
  if (!cfg.truth_csv.empty() && std::filesystem::exists(cfg.truth_csv))
    truth = io::load_truth(cfg.truth_csv, loaded.catalog);

  const auto trace_path =
      default_path(cfg, cfg.trace_csv, cfg.mode == "nnls" ? "nnls_trace.csv" : "trace.csv");

  std::vector<std::pair<std::string, eval::ErrorSummary>> summaries;
  filter::FilterTrace trace;
  if (cfg.mode == "nnls") {
    const auto estimates = io::load_baseline_estimates(trace_path, loaded.catalog);
    auto summary = eval::summarize(eval::prediction_errors(estimates, loaded.heats, cfg.burn_in),
                                   cfg.burn_in);
    summaries.emplace_back("nnls_" + cfg.element.element_id, summary);
  } else {
    trace = io::load_filter_trace(trace_path, loaded.catalog);
    auto summary =
        eval::summarize(eval::prediction_errors(trace, loaded.heats, cfg.burn_in), cfg.burn_in);
    if (cfg.mode == "ukf" && truth && !truth->c.empty()) {
      synth::SyntheticDataset ds;
      ds.catalog = loaded.catalog;
      ds.element = cfg.element;
      ds.heats = loaded.heats;
      ds.truth_alpha = truth->alpha;
      ds.truth_c = truth->c;
      summary.numden = eval::numden_errors(trace, ds, cfg.burn_in);
    }
    summaries.emplace_back(cfg.mode + "_" + cfg.element.element_id, summary);
  }

  eval::ExportOptions opts;
  opts.burn_in = cfg.burn_in;
  for (const auto& id : cfg.series_components) {
    bool found = false;
    for (int i = 0; i < loaded.catalog.size(); ++i) {
      if (loaded.catalog.scrap_ids[static_cast<std::size_t>(i)] == id) {
        opts.series_components.push_back(i);
        found = true;
      }
    }
    if (!found) throw DomainError("series component not in catalog: " + id);
  }
  eval::export_report(cfg.out_dir, summaries, trace, loaded.heats, loaded.catalog,
                      truth ? &truth->alpha : nullptr,
                      truth && !truth->c.empty() ? &truth->c : nullptr, opts);

  std::vector<std::string> outputs = {(cfg.out_dir / "summary.csv").string(),
                                      (cfg.out_dir / "series.csv").string()};
  io::write_manifest(cfg.out_dir, "evaluate", dump_run_config(cfg), cfg.seed, outputs);
  return outputs;
}

std::vector<std::string> cmd_sweep(const RunConfig& cfg) {
  auto loaded = io::load_heats(cfg.heats_csv);
  synth::SyntheticDataset ds;
  ds.catalog = loaded.catalog;
  ds.element = cfg.element;
  ds.heats = std::move(loaded.heats);
  if (!cfg.truth_csv.empty() && std::filesystem::exists(cfg.truth_csv)) {
    auto truth = io::load_truth(cfg.truth_csv, ds.catalog);
    ds.truth_alpha = std::move(truth.alpha);
    ds.truth_c = std::move(truth.c);
  }

  NoiseSpec spec;
  if (!cfg.noise_spec_json.empty() && std::filesystem::exists(cfg.noise_spec_json))
    spec = io::load_noise_spec(cfg.noise_spec_json);
  else
    spec = resolve_noise_spec(cfg, &ds.heats);

  eval::SweepOptions opts;
  opts.burn_in = cfg.burn_in;
  opts.k = cfg.k;
  opts.volatility_component = std::min(ds.catalog.size() - 1, 35);
  const auto axis = eval::sweep_axis_from_string(cfg.sweep_axis);
  const auto rows = eval::misspecification_sweep(ds, spec, axis, cfg.sweep_multipliers, opts);

  const auto path = cfg.out_dir / "sweep.csv";
  auto os = std::ofstream(path, std::ios::binary);
  if (!os) throw IoError("cannot write " + path.string());
  io::write_csv_row(os, {"axis", "multiplier", "n", "mean_error_ppm", "std_error_ppm",
                         "volatility_ppm", "avg_posterior_sd_ppm"});
  for (const auto& row : rows)
    io::write_csv_row(os, {cfg.sweep_axis, io::format_double(row.multiplier),
                           std::to_string(row.summary.n), io::format_double(row.summary.mean_ppm),
                           io::format_double(row.summary.std_ppm),
                           io::format_double(row.volatility_ppm),
                           io::format_double(row.avg_posterior_sd_ppm)});
  os.close();

  io::write_manifest(cfg.out_dir, "sweep", dump_run_config(cfg), cfg.seed, {path.string()});
  return {path.string()};
}

}  // namespace scrapest::cli
