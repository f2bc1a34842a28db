#include <CLI11.hpp>

#include <nlohmann/json.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "scrapest/commands.hpp"

namespace {

struct Overrides {
  std::optional<std::string> mode;
  std::optional<std::string> element;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<long> burn_in;
  std::optional<int> window;
  std::optional<double> k;
};

void apply(const Overrides& ov, scrapest::cli::RunConfig& cfg) {
  if (ov.mode) cfg.mode = *ov.mode;
  if (ov.element) {
    cfg.element.element_id = *ov.element;
    // Known elements imply their observation model; others keep the config's.
    if (*ov.element == "Cu" || *ov.element == "Ni") cfg.element.transfers_to_slag = false;
    if (*ov.element == "Cr" || *ov.element == "S") cfg.element.transfers_to_slag = true;
  }
  if (ov.seed) cfg.seed = *ov.seed;
  if (ov.out) cfg.out_dir = *ov.out;
  if (ov.burn_in) cfg.burn_in = *ov.burn_in;
  if (ov.window) cfg.window.window = *ov.window;
  if (ov.k) cfg.k = *ov.k;
}

void print_error_json(const std::string& type, const std::string& message) {
  nlohmann::json j;
  j["error"] = {{"type", type}, {"message", message}};
  std::cerr << j.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"scrapest - scrap composition estimation from production heats"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides ov;
  app.add_option("--config", config_path, "run configuration (JSON)")->required();
  app.add_option("--mode", ov.mode, "kalman | ukf | nnls");
  app.add_option("--element", ov.element, "element id (Cu, Ni, Cr, S, ...)");
  app.add_option("--seed", ov.seed, "master RNG seed");
  app.add_option("--out", ov.out, "output directory");
  app.add_option("--burn-in", ov.burn_in, "heats excluded from error statistics");
  app.add_option("--window", ov.window, "sliding-window size for the NNLS baseline");
  app.add_option("--k", ov.k, "sigma-point spread parameter");

  auto* derive = app.add_subcommand("derive-params", "resolve hyperparameters to a noise spec");
  auto* simulate = app.add_subcommand("simulate", "generate a synthetic dataset");
  auto* fit = app.add_subcommand("fit", "run a filter or the NNLS baseline over heats");
  auto* evaluate = app.add_subcommand("evaluate", "error summaries and plot-data series");
  auto* sweep = app.add_subcommand("sweep", "rerun the filter across hyperparameter multipliers");

  std::string sweep_axis;
  std::vector<double> sweep_multipliers;
  sweep->add_option("--axis", sweep_axis,
                    "q | H | gamma-fixed-Q | gamma-fixed-Pinf | q_c | Q_c | k "
                    "(k multipliers are absolute values)");
  sweep->add_option("--multipliers", sweep_multipliers, "multiplier grid")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    scrapest::cli::RunConfig cfg = scrapest::cli::load_run_config(config_path);
    apply(ov, cfg);

    std::vector<std::string> outputs;
    if (derive->parsed()) {
      outputs = scrapest::cli::cmd_derive_params(cfg);
    } else if (simulate->parsed()) {
      outputs = scrapest::cli::cmd_simulate(cfg);
    } else if (fit->parsed()) {
      outputs = scrapest::cli::cmd_fit(cfg);
    } else if (evaluate->parsed()) {
      outputs = scrapest::cli::cmd_evaluate(cfg);
    } else if (sweep->parsed()) {
      if (!sweep_axis.empty()) cfg.sweep_axis = sweep_axis;
      if (!sweep_multipliers.empty()) cfg.sweep_multipliers = sweep_multipliers;
      outputs = scrapest::cli::cmd_sweep(cfg);
    }
    for (const auto& path : outputs) std::cout << path << '\n';
    return 0;
  } catch (const scrapest::ParseError& e) {
    print_error_json("parse", e.what());
  } catch (const scrapest::IoError& e) {
    print_error_json("io", e.what());
  } catch (const scrapest::MomentMatchingError& e) {
    print_error_json("moment-matching", e.what());
  } catch (const scrapest::DomainError& e) {
    print_error_json("domain", e.what());
  } catch (const scrapest::ScrapestError& e) {
    print_error_json("runtime", e.what());
  } catch (const std::exception& e) {
    print_error_json("internal", e.what());
  }
  return 1;
}
