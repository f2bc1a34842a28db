#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "scrapest/baseline.hpp"
#include "scrapest/filters.hpp"
#include "scrapest/synthgen.hpp"
#include "scrapest/types.hpp"

namespace scrapest::io {

/// Heats CSV schema (wide; fractions in ppm, masses in kg):
///   heat_index, m_scrap_<id>_kg..., m_hm_kg, f_hm_ppm, m_steel_kg,
///   f_steel_ppm (blank = no measurement), m_slag_kg,
///   f_feon_slag (plain fraction; blank for linear elements)
/// The m_scrap_* columns define the catalog and its order.
struct LoadedHeats {
  std::vector<HeatRecord> heats;
  ScrapCatalog catalog;
};

void save_heats(const std::filesystem::path& path, const std::vector<HeatRecord>& heats,
                const ScrapCatalog& catalog);
LoadedHeats load_heats(const std::filesystem::path& path);

/// Truth CSV: heat_index, alpha_<id>_ppm..., then c1,c2 when present.
struct LoadedTruth {
  std::vector<Eigen::VectorXd> alpha;
  std::vector<Eigen::Vector2d> c;  // empty when the file has no c columns
};

void save_truth(const std::filesystem::path& path,
                const std::vector<Eigen::VectorXd>& truth_alpha,
                const std::vector<Eigen::Vector2d>& truth_c, const ScrapCatalog& catalog);
LoadedTruth load_truth(const std::filesystem::path& path, const ScrapCatalog& catalog);

/// Hyperparameter sidecar (JSON): gamma, q_ppm, Q_diag_ppm2, H_g2 and the
/// optional q_c / Qc_diag, plus the dataset seed when one applies.
void save_noise_spec(const std::filesystem::path& path, const NoiseSpec& spec,
                     std::optional<std::uint64_t> seed);
NoiseSpec load_noise_spec(const std::filesystem::path& path,
                          std::uint64_t* seed_out = nullptr);

void save_filter_trace(const std::filesystem::path& path, const filter::FilterTrace& trace,
                       const ScrapCatalog& catalog);
filter::FilterTrace load_filter_trace(const std::filesystem::path& path,
                                      const ScrapCatalog& catalog);

void save_baseline_estimates(const std::filesystem::path& path,
                             const std::vector<baseline::WindowEstimate>& estimates,
                             const ScrapCatalog& catalog);
std::vector<baseline::WindowEstimate> load_baseline_estimates(
    const std::filesystem::path& path, const ScrapCatalog& catalog);

std::uint64_t fnv1a64(std::string_view data);

/// Every command drops a manifest next to its outputs: command name, code
/// version, seed, hash of the resolved config, and the files written.
void write_manifest(const std::filesystem::path& dir, const std::string& command,
                    const std::string& config_dump, std::uint64_t seed,
                    const std::vector<std::string>& outputs);

}  // namespace scrapest::io
