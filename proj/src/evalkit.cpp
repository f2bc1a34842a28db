#include "scrapest/evalkit.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include <cmath>
#include <fstream>
#include <sstream>

#include "scrapest/csv.hpp"
#include "scrapest/moments.hpp"

namespace scrapest::eval {

namespace {

struct MeanStd {
  double mean = 0.0;
  double sd = 0.0;
  long n = 0;
};

MeanStd mean_std(const std::vector<double>& xs) {
  MeanStd out;
  out.n = static_cast<long>(xs.size());
  if (out.n == 0) return out;
  double sum = 0.0;
  for (double x : xs) sum += x;
  out.mean = sum / static_cast<double>(out.n);
  if (out.n < 2) return out;
  double ss = 0.0;
  for (double x : xs) ss += (x - out.mean) * (x - out.mean);
  out.sd = std::sqrt(ss / static_cast<double>(out.n - 1));
  return out;
}

void require_aligned(const filter::FilterTrace& trace, const std::vector<HeatRecord>& heats) {
  if (trace.size() != static_cast<int>(heats.size()))
    throw DomainError("trace and heats have different lengths");
  for (std::size_t t = 0; t < heats.size(); ++t)
    if (trace.entries[t].heat_index != heats[t].heat_index)
      throw DomainError("trace and heats disagree on heat_index ordering");
}

}  // namespace

std::vector<double> prediction_errors(const filter::FilterTrace& trace,
                                      const std::vector<HeatRecord>& heats, long burn_in) {
  require_aligned(trace, heats);
  if (!heats.empty() && burn_in >= heats.back().heat_index)
    throw DomainError("burn-in leaves no heats");
  std::vector<double> errors;
  errors.reserve(heats.size());
  for (std::size_t t = 0; t < heats.size(); ++t) {
    const auto& h = heats[t];
    if (h.heat_index <= burn_in || !h.f_steel) continue;
    errors.push_back(trace.entries[t].predicted_f_steel - *h.f_steel);
  }
  return errors;
}

std::vector<double> prediction_errors(const std::vector<baseline::WindowEstimate>& estimates,
                                      const std::vector<HeatRecord>& heats, long burn_in) {
  std::vector<double> errors;
  errors.reserve(estimates.size());
  std::size_t cursor = 0;
  for (const auto& est : estimates) {
    while (cursor < heats.size() && heats[cursor].heat_index < est.heat_index) ++cursor;
    if (cursor >= heats.size() || heats[cursor].heat_index != est.heat_index)
      throw DomainError("baseline estimate has no matching heat");
    const auto& h = heats[cursor];
    if (h.heat_index <= burn_in || !h.f_steel) continue;
    errors.push_back(est.predicted_f_steel - *h.f_steel);
  }
  return errors;
}

ErrorSummary summarize(const std::vector<double>& errors_fraction, long burn_in) {
  if (errors_fraction.size() < 2) throw DomainError("summarize: need at least two errors");
  const MeanStd ms = mean_std(errors_fraction);
  ErrorSummary s;
  s.mean_ppm = to_ppm(ms.mean);
  s.std_ppm = to_ppm(ms.sd);
  s.n = ms.n;
  s.burn_in = burn_in;
  return s;
}

NumDenStats numden_errors(const filter::FilterTrace& trace, const synth::SyntheticDataset& ds,
                          long burn_in) {
  require_aligned(trace, ds.heats);
  if (ds.truth_c.empty()) throw DomainError("numden_errors: dataset has no partition truth");
  const int n = ds.catalog.size();
  std::vector<double> num_err, den_err;
  for (std::size_t t = 0; t < ds.heats.size(); ++t) {
    const auto& h = ds.heats[t];
    const auto& e = trace.entries[t];
    if (h.heat_index <= burn_in || !h.f_steel) continue;
    const double true_num = h.scrap_mass_kg.dot(ds.truth_alpha[t]) + h.m_hm_kg * h.f_hm;
    const double true_ell = ds.truth_c[t][0] + ds.truth_c[t][1] * h.f_feon_slag.value_or(0.0);
    const double true_den = h.m_steel_kg + h.m_slag_kg * true_ell;
    num_err.push_back(e.predicted_numerator_kg - true_num);
    den_err.push_back(e.predicted_denominator_kg - true_den);
  }
  (void)n;
  const MeanStd nm = mean_std(num_err);
  const MeanStd dn = mean_std(den_err);
  NumDenStats out;
  out.num_mean_g = nm.mean * 1e3;  // kg -> g
  out.num_std_g = nm.sd * 1e3;
  out.den_mean_t = dn.mean * 1e-3;  // kg -> t
  out.den_std_t = dn.sd * 1e-3;
  out.n = nm.n;
  return out;
}

double component_volatility_ppm(const filter::FilterTrace& trace, int component, long burn_in) {
  std::vector<double> series;
  for (const auto& e : trace.entries) {
    if (e.heat_index <= burn_in) continue;
    if (component < 0 || component >= e.posterior_mean.size())
      throw DomainError("volatility component out of range");
    series.push_back(e.posterior_mean[component]);
  }
  return to_ppm(mean_std(series).sd);
}

double mean_posterior_sd_ppm(const filter::FilterTrace& trace, int component, long burn_in) {
  double sum = 0.0;
  long n = 0;
  for (const auto& e : trace.entries) {
    if (e.heat_index <= burn_in) continue;
    sum += std::sqrt(std::max(0.0, e.posterior_cov_diag[component]));
    ++n;
  }
  return n > 0 ? to_ppm(sum / static_cast<double>(n)) : 0.0;
}

double band_coverage(const filter::FilterTrace& trace,
                     const std::vector<Eigen::VectorXd>& truth_alpha, long burn_in) {
  if (trace.size() != static_cast<int>(truth_alpha.size()))
    throw DomainError("band_coverage: trace and truth lengths differ");
  long inside = 0, total = 0;
  for (std::size_t t = 0; t < truth_alpha.size(); ++t) {
    const auto& e = trace.entries[t];
    if (e.heat_index <= burn_in) continue;
    const int n = static_cast<int>(truth_alpha[t].size());
    for (int i = 0; i < n; ++i) {
      const double band = 2.0 * std::sqrt(std::max(0.0, e.posterior_cov_diag[i]));
      if (std::abs(truth_alpha[t][i] - e.posterior_mean[i]) <= band) ++inside;
      ++total;
    }
  }
  if (total == 0) throw DomainError("band_coverage: nothing past burn-in");
  return static_cast<double>(inside) / static_cast<double>(total);
}

SweepAxis sweep_axis_from_string(const std::string& name) {
  if (name == "q") return SweepAxis::kQ;
  if (name == "H") return SweepAxis::kH;
  if (name == "gamma-fixed-Q") return SweepAxis::kGammaFixedQ;
  if (name == "gamma-fixed-Pinf") return SweepAxis::kGammaFixedPinf;
  if (name == "q_c") return SweepAxis::kQc;
  if (name == "Q_c") return SweepAxis::kQcCov;
  if (name == "k") return SweepAxis::kK;
  throw DomainError("unknown sweep axis: " + name +
                    " (expected q, H, gamma-fixed-Q, gamma-fixed-Pinf, q_c, Q_c, k)");
}

std::string to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kQ: return "q";
    case SweepAxis::kH: return "H";
    case SweepAxis::kGammaFixedQ: return "gamma-fixed-Q";
    case SweepAxis::kGammaFixedPinf: return "gamma-fixed-Pinf";
    case SweepAxis::kQc: return "q_c";
    case SweepAxis::kQcCov: return "Q_c";
    case SweepAxis::kK: return "k";
  }
  return "?";
}

std::vector<SweepRow> misspecification_sweep(const synth::SyntheticDataset& ds,
                                             const NoiseSpec& base, SweepAxis axis,
                                             const std::vector<double>& multipliers,
                                             const SweepOptions& opts) {
  if (multipliers.empty()) throw DomainError("sweep: no multipliers given");
  base.validate();
  const bool augmented = ds.element.transfers_to_slag;
  if ((axis == SweepAxis::kQc || axis == SweepAxis::kQcCov) && !augmented)
    throw DomainError("partition-parameter axes need a slag-partitioning element");

  std::vector<SweepRow> rows(multipliers.size());
  std::exception_ptr failure;

#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < static_cast<int>(multipliers.size()); ++i) {
    try {
      const double mult = multipliers[static_cast<std::size_t>(i)];
      NoiseSpec spec = base;
      double k = opts.k;
      switch (axis) {
        case SweepAxis::kQ:
          spec.q *= mult;
          break;
        case SweepAxis::kH:
          spec.H *= mult;
          break;
        case SweepAxis::kGammaFixedQ:
          spec.gamma *= mult;
          break;
        case SweepAxis::kGammaFixedPinf: {
          const Eigen::VectorXd p_inf = stationary_covariance(base.gamma, base.Q_diag);
          spec.gamma *= mult;
          spec.Q_diag = process_noise_from_stationary(spec.gamma, p_inf);
          if (spec.has_partition()) {
            const Eigen::VectorXd pc_inf = stationary_covariance(base.gamma, *base.Qc_diag);
            spec.Qc_diag = Eigen::Vector2d(process_noise_from_stationary(spec.gamma, pc_inf));
          }
          break;
        }
        case SweepAxis::kQc:
          *spec.q_c *= mult;
          break;
        case SweepAxis::kQcCov:
          *spec.Qc_diag *= mult;
          break;
        case SweepAxis::kK:
          k = mult;  // absolute value, not a scale factor
          break;
      }
      spec.validate();

      filter::RunOptions ro;
      ro.k = k;
      const filter::FilterTrace trace =
          filter::run_filter(ds.heats, spec, ds.element, filter::default_init(spec, augmented), ro);
      SweepRow row;
      row.multiplier = mult;
      row.summary = summarize(prediction_errors(trace, ds.heats, opts.burn_in), opts.burn_in);
      row.volatility_ppm = component_volatility_ppm(trace, opts.volatility_component, opts.burn_in);
      row.avg_posterior_sd_ppm =
          mean_posterior_sd_ppm(trace, opts.volatility_component, opts.burn_in);
      rows[static_cast<std::size_t>(i)] = row;
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return rows;
}

namespace {

void emit_series(std::ostream& os, const std::string& name, int t, double value) {
  io::write_csv_row(os, {name, std::to_string(t), io::format_double(value)});
}

}  // namespace

void export_report(const std::filesystem::path& out_dir,
                   const std::vector<std::pair<std::string, ErrorSummary>>& summaries,
                   const filter::FilterTrace& trace, const std::vector<HeatRecord>& heats,
                   const ScrapCatalog& catalog,
                   const std::vector<Eigen::VectorXd>* truth_alpha,
                   const std::vector<Eigen::Vector2d>* truth_c, const ExportOptions& opts) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);

  const auto summary_path = out_dir / "summary.csv";
  {
    std::ofstream os(summary_path, std::ios::binary);
    if (!os) throw IoError("cannot write " + summary_path.string());
    io::write_csv_row(os, {"label", "n", "burn_in", "mean_error_ppm", "std_error_ppm",
                           "num_mean_g", "num_std_g", "den_mean_t", "den_std_t"});
    for (const auto& [label, s] : summaries) {
      std::vector<std::string> row = {label, std::to_string(s.n), std::to_string(s.burn_in),
                                      io::format_double(s.mean_ppm), io::format_double(s.std_ppm)};
      if (s.numden) {
        row.push_back(io::format_double(s.numden->num_mean_g));
        row.push_back(io::format_double(s.numden->num_std_g));
        row.push_back(io::format_double(s.numden->den_mean_t));
        row.push_back(io::format_double(s.numden->den_std_t));
      } else {
        row.insert(row.end(), {"", "", "", ""});
      }
      io::write_csv_row(os, row);
    }
  }

  const auto series_path = out_dir / "series.csv";
  std::ofstream os(series_path, std::ios::binary);
  if (!os) throw IoError("cannot write " + series_path.string());
  io::write_csv_row(os, {"series", "t", "value"});
  if (trace.size() == 0) return;

  if (trace.size() != static_cast<int>(heats.size()))
    throw DomainError("export_report: trace and heats lengths differ");
  const int n = catalog.size();
  const bool augmented = trace.state_dim == n + 2;

  for (int idx : opts.series_components) {
    if (idx < 0 || idx >= n) throw DomainError("series component out of range");
    const std::string& id = catalog.scrap_ids[static_cast<std::size_t>(idx)];
    for (int t = 0; t < trace.size(); ++t) {
      const auto& e = trace.entries[static_cast<std::size_t>(t)];
      const double est = to_ppm(e.posterior_mean[idx]);
      const double band = 2.0 * to_ppm(std::sqrt(std::max(0.0, e.posterior_cov_diag[idx])));
      emit_series(os, "alpha_" + id + "_est_ppm", e.heat_index, est);
      emit_series(os, "alpha_" + id + "_lo_ppm", e.heat_index, est - band);
      emit_series(os, "alpha_" + id + "_hi_ppm", e.heat_index, est + band);
      if (truth_alpha)
        emit_series(os, "alpha_" + id + "_truth_ppm", e.heat_index,
                    to_ppm((*truth_alpha)[static_cast<std::size_t>(t)][idx]));
      emit_series(os, "usage_" + id, e.heat_index,
                  heats[static_cast<std::size_t>(t)].scrap_mass_kg[idx] > 0.0 ? 1.0 : 0.0);
    }
  }

  if (augmented) {
    for (int t = 0; t < trace.size(); ++t) {
      const auto& e = trace.entries[static_cast<std::size_t>(t)];
      emit_series(os, "c1_est", e.heat_index, e.posterior_mean[n]);
      emit_series(os, "c2_est", e.heat_index, e.posterior_mean[n + 1]);
      if (truth_c) {
        emit_series(os, "c1_truth", e.heat_index, (*truth_c)[static_cast<std::size_t>(t)][0]);
        emit_series(os, "c2_truth", e.heat_index, (*truth_c)[static_cast<std::size_t>(t)][1]);
      }
    }
  }
}

}  // namespace scrapest::eval
