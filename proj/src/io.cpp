#include "scrapest/io.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "scrapest/csv.hpp"

namespace scrapest::io {

using nlohmann::json;

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write " + path.string());
  return os;
}

json load_json(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return j;
}

class ErrorList {
 public:
  explicit ErrorList(std::string origin) : origin_(std::move(origin)) {}

  void add(long line, const std::string& msg) {
    if (count_ < 20) {
      std::ostringstream os;
      os << origin_ << ":" << line << ": " << msg;
      items_.push_back(os.str());
    }
    ++count_;
  }

  void raise_if_any() const {
    if (count_ == 0) return;
    std::ostringstream os;
    os << count_ << " invalid row(s) in " << origin_ << ":";
    for (const auto& item : items_) os << "\n  " << item;
    if (count_ > static_cast<long>(items_.size())) os << "\n  ...";
    throw ParseError(os.str());
  }

 private:
  std::string origin_;
  std::vector<std::string> items_;
  long count_ = 0;
};

}  // namespace

void save_heats(const std::filesystem::path& path, const std::vector<HeatRecord>& heats,
                const ScrapCatalog& catalog) {
  auto os = open_out(path);
  std::vector<std::string> header = {"heat_index"};
  for (const auto& id : catalog.scrap_ids) header.push_back("m_scrap_" + id + "_kg");
  for (const char* c : {"m_hm_kg", "f_hm_ppm", "m_steel_kg", "f_steel_ppm", "m_slag_kg",
                        "f_feon_slag"})
    header.push_back(c);
  write_csv_row(os, header);

  std::vector<std::string> row;
  for (const auto& h : heats) {
    row.clear();
    row.push_back(std::to_string(h.heat_index));
    for (int i = 0; i < h.scrap_mass_kg.size(); ++i)
      row.push_back(format_double(h.scrap_mass_kg[i]));
    row.push_back(format_double(h.m_hm_kg));
    row.push_back(format_double(to_ppm(h.f_hm)));
    row.push_back(format_double(h.m_steel_kg));
    row.push_back(h.f_steel ? format_double(to_ppm(*h.f_steel)) : "");
    row.push_back(format_double(h.m_slag_kg));
    row.push_back(h.f_feon_slag ? format_double(*h.f_feon_slag) : "");
    write_csv_row(os, row);
  }
}

LoadedHeats load_heats(const std::filesystem::path& path) {
  const CsvTable table = read_csv_file(path);
  const std::string origin = path.string();
  if (table.header.empty()) throw ParseError(origin + ": missing header row");

  LoadedHeats out;
  std::vector<int> scrap_cols;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    const std::string& name = table.header[i];
    if (name.starts_with("m_scrap_") && name.ends_with("_kg")) {
      scrap_cols.push_back(static_cast<int>(i));
      out.catalog.scrap_ids.push_back(name.substr(8, name.size() - 11));
    }
  }
  if (scrap_cols.empty()) throw ParseError(origin + ": no m_scrap_<id>_kg columns");
  out.catalog.validate();

  const int c_index = table.column("heat_index");
  const int c_hm = table.column("m_hm_kg");
  const int c_fhm = table.column("f_hm_ppm");
  const int c_steel = table.column("m_steel_kg");
  const int c_fsteel = table.column("f_steel_ppm");
  const int c_slag = table.column("m_slag_kg");
  const int c_feon = table.column("f_feon_slag");
  for (auto [col, name] : std::initializer_list<std::pair<int, const char*>>{
           {c_index, "heat_index"}, {c_hm, "m_hm_kg"}, {c_fhm, "f_hm_ppm"},
           {c_steel, "m_steel_kg"}, {c_fsteel, "f_steel_ppm"}, {c_slag, "m_slag_kg"},
           {c_feon, "f_feon_slag"}})
    if (col < 0) throw ParseError(origin + ": missing column " + name);

  ErrorList errors(origin);
  int prev_index = 0;
  const int n = static_cast<int>(scrap_cols.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const long line = static_cast<long>(r) + 2;  // header is line 1
    const auto& row = table.rows[r];
    try {
      HeatRecord h;
      h.heat_index = static_cast<int>(parse_long(row[c_index], origin, line));
      h.scrap_mass_kg.resize(n);
      for (int i = 0; i < n; ++i)
        h.scrap_mass_kg[i] = parse_double(row[static_cast<std::size_t>(scrap_cols[i])], origin, line);
      h.m_hm_kg = parse_double(row[c_hm], origin, line);
      h.f_hm = from_ppm(parse_double(row[c_fhm], origin, line));
      h.m_steel_kg = parse_double(row[c_steel], origin, line);
      if (!row[c_fsteel].empty())
        h.f_steel = from_ppm(parse_double(row[c_fsteel], origin, line));
      h.m_slag_kg = parse_double(row[c_slag], origin, line);
      if (!row[c_feon].empty()) h.f_feon_slag = parse_double(row[c_feon], origin, line);
      h.validate(n);
      if (h.heat_index <= prev_index) {
        std::ostringstream os;
        os << "heat_index " << h.heat_index << " not greater than previous " << prev_index;
        throw ParseError(os.str());
      }
      prev_index = h.heat_index;
      out.heats.push_back(std::move(h));
    } catch (const ScrapestError& e) {
      errors.add(line, e.what());
    }
  }
  errors.raise_if_any();
  return out;
}

void save_truth(const std::filesystem::path& path,
                const std::vector<Eigen::VectorXd>& truth_alpha,
                const std::vector<Eigen::Vector2d>& truth_c, const ScrapCatalog& catalog) {
  auto os = open_out(path);
  std::vector<std::string> header = {"heat_index"};
  for (const auto& id : catalog.scrap_ids) header.push_back("alpha_" + id + "_ppm");
  const bool with_c = !truth_c.empty();
  if (with_c) {
    header.push_back("c1");
    header.push_back("c2");
  }
  write_csv_row(os, header);
  std::vector<std::string> row;
  for (std::size_t t = 0; t < truth_alpha.size(); ++t) {
    row.clear();
    row.push_back(std::to_string(t + 1));
    for (int i = 0; i < truth_alpha[t].size(); ++i)
      row.push_back(format_double(to_ppm(truth_alpha[t][i])));
    if (with_c) {
      row.push_back(format_double(truth_c[t][0]));
      row.push_back(format_double(truth_c[t][1]));
    }
    write_csv_row(os, row);
  }
}

LoadedTruth load_truth(const std::filesystem::path& path, const ScrapCatalog& catalog) {
  const CsvTable table = read_csv_file(path);
  const std::string origin = path.string();
  LoadedTruth out;
  const int n = catalog.size();
  std::vector<int> alpha_cols;
  for (const auto& id : catalog.scrap_ids) {
    const int col = table.column("alpha_" + id + "_ppm");
    if (col < 0) throw ParseError(origin + ": missing column alpha_" + id + "_ppm");
    alpha_cols.push_back(col);
  }
  const int c1 = table.column("c1");
  const int c2 = table.column("c2");
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const long line = static_cast<long>(r) + 2;
    const auto& row = table.rows[r];
    Eigen::VectorXd alpha(n);
    for (int i = 0; i < n; ++i)
      alpha[i] = from_ppm(parse_double(row[static_cast<std::size_t>(alpha_cols[i])], origin, line));
    out.alpha.push_back(std::move(alpha));
    if (c1 >= 0 && c2 >= 0)
      out.c.emplace_back(parse_double(row[c1], origin, line), parse_double(row[c2], origin, line));
  }
  return out;
}

void save_noise_spec(const std::filesystem::path& path, const NoiseSpec& spec,
                     std::optional<std::uint64_t> seed) {
  json j;
  j["gamma"] = spec.gamma;
  j["q_ppm"] = std::vector<double>(spec.q.data(), spec.q.data() + spec.q.size());
  for (auto& v : j["q_ppm"]) v = v.get<double>() * 1e6;
  std::vector<double> q_diag(spec.Q_diag.data(), spec.Q_diag.data() + spec.Q_diag.size());
  for (auto& v : q_diag) v *= 1e12;  // fraction^2 -> ppm^2
  j["Q_diag_ppm2"] = q_diag;
  j["H_g2"] = spec.H * 1e6;  // kg^2 -> g^2
  if (spec.q_c) j["q_c"] = {(*spec.q_c)[0], (*spec.q_c)[1]};
  if (spec.Qc_diag) j["Qc_diag"] = {(*spec.Qc_diag)[0], (*spec.Qc_diag)[1]};
  if (seed) j["seed"] = *seed;
  auto os = open_out(path);
  os << j.dump(2) << '\n';
}

NoiseSpec load_noise_spec(const std::filesystem::path& path, std::uint64_t* seed_out) {
  const json j = load_json(path);
  NoiseSpec spec;
  try {
    spec.gamma = j.at("gamma").get<double>();
    const auto q_ppm = j.at("q_ppm").get<std::vector<double>>();
    const auto q_diag_ppm2 = j.at("Q_diag_ppm2").get<std::vector<double>>();
    spec.q = Eigen::Map<const Eigen::VectorXd>(q_ppm.data(), static_cast<long>(q_ppm.size())) * kPpm;
    spec.Q_diag = Eigen::Map<const Eigen::VectorXd>(q_diag_ppm2.data(),
                                                    static_cast<long>(q_diag_ppm2.size())) * 1e-12;
    spec.H = j.at("H_g2").get<double>() * 1e-6;
    if (j.contains("q_c")) {
      const auto qc = j.at("q_c").get<std::vector<double>>();
      const auto qcd = j.at("Qc_diag").get<std::vector<double>>();
      if (qc.size() != 2 || qcd.size() != 2)
        throw ParseError(path.string() + ": q_c / Qc_diag must have two entries");
      spec.q_c = Eigen::Vector2d(qc[0], qc[1]);
      spec.Qc_diag = Eigen::Vector2d(qcd[0], qcd[1]);
    }
    if (seed_out && j.contains("seed")) *seed_out = j.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  spec.validate();
  return spec;
}

namespace {

const char* kTraceFixedColumns[] = {"heat_index", "updated", "predicted_f_steel_ppm",
                                    "innovation_kg", "innovation_var_kg2",
                                    "negative_prediction"};

}  // namespace

void save_filter_trace(const std::filesystem::path& path, const filter::FilterTrace& trace,
                       const ScrapCatalog& catalog) {
  auto os = open_out(path);
  const int n = catalog.size();
  const bool augmented = trace.state_dim == n + 2;
  std::vector<std::string> header(std::begin(kTraceFixedColumns), std::end(kTraceFixedColumns));
  for (const auto& id : catalog.scrap_ids) header.push_back("alpha_" + id + "_ppm");
  for (const auto& id : catalog.scrap_ids) header.push_back("sd_" + id + "_ppm");
  if (augmented)
    for (const char* c : {"c1", "c2", "sd_c1", "sd_c2", "pred_numerator_kg", "pred_denominator_kg"})
      header.push_back(c);
  write_csv_row(os, header);

  std::vector<std::string> row;
  for (const auto& e : trace.entries) {
    row.clear();
    row.push_back(std::to_string(e.heat_index));
    row.push_back(e.updated ? "1" : "0");
    row.push_back(format_double(to_ppm(e.predicted_f_steel)));
    row.push_back(e.updated ? format_double(e.innovation) : "");
    row.push_back(e.updated ? format_double(e.innovation_variance) : "");
    row.push_back(e.negative_prediction ? "1" : "0");
    for (int i = 0; i < n; ++i) row.push_back(format_double(to_ppm(e.posterior_mean[i])));
    for (int i = 0; i < n; ++i)
      row.push_back(format_double(to_ppm(std::sqrt(std::max(0.0, e.posterior_cov_diag[i])))));
    if (augmented) {
      row.push_back(format_double(e.posterior_mean[n]));
      row.push_back(format_double(e.posterior_mean[n + 1]));
      row.push_back(format_double(std::sqrt(std::max(0.0, e.posterior_cov_diag[n]))));
      row.push_back(format_double(std::sqrt(std::max(0.0, e.posterior_cov_diag[n + 1]))));
      row.push_back(format_double(e.predicted_numerator_kg));
      row.push_back(format_double(e.predicted_denominator_kg));
    }
    write_csv_row(os, row);
  }
}

filter::FilterTrace load_filter_trace(const std::filesystem::path& path,
                                      const ScrapCatalog& catalog) {
  const CsvTable table = read_csv_file(path);
  const std::string origin = path.string();
  const int n = catalog.size();
  const bool augmented = table.column("c1") >= 0;

  for (const char* name : kTraceFixedColumns)
    if (table.column(name) < 0) throw ParseError(origin + ": missing column " + name);

  filter::FilterTrace trace;
  trace.state_dim = augmented ? n + 2 : n;
  const int dim = trace.state_dim;
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();

  std::vector<int> mean_cols, sd_cols;
  for (const auto& id : catalog.scrap_ids) {
    const int mc = table.column("alpha_" + id + "_ppm");
    const int sc = table.column("sd_" + id + "_ppm");
    if (mc < 0 || sc < 0) throw ParseError(origin + ": missing columns for scrap " + id);
    mean_cols.push_back(mc);
    sd_cols.push_back(sc);
  }

  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const long line = static_cast<long>(r) + 2;
    const auto& row = table.rows[r];
    filter::TraceEntry e;
    e.heat_index = static_cast<int>(parse_long(row[table.column("heat_index")], origin, line));
    e.updated = row[table.column("updated")] == "1";
    e.predicted_f_steel =
        from_ppm(parse_double(row[table.column("predicted_f_steel_ppm")], origin, line));
    e.innovation =
        e.updated ? parse_double(row[table.column("innovation_kg")], origin, line) : nan;
    e.innovation_variance =
        e.updated ? parse_double(row[table.column("innovation_var_kg2")], origin, line) : nan;
    e.negative_prediction = row[table.column("negative_prediction")] == "1";
    e.posterior_mean.resize(dim);
    e.posterior_cov_diag.resize(dim);
    for (int i = 0; i < n; ++i) {
      e.posterior_mean[i] = from_ppm(parse_double(row[mean_cols[i]], origin, line));
      const double sd = from_ppm(parse_double(row[sd_cols[i]], origin, line));
      e.posterior_cov_diag[i] = sd * sd;
    }
    if (augmented) {
      e.posterior_mean[n] = parse_double(row[table.column("c1")], origin, line);
      e.posterior_mean[n + 1] = parse_double(row[table.column("c2")], origin, line);
      const double s1 = parse_double(row[table.column("sd_c1")], origin, line);
      const double s2 = parse_double(row[table.column("sd_c2")], origin, line);
      e.posterior_cov_diag[n] = s1 * s1;
      e.posterior_cov_diag[n + 1] = s2 * s2;
      e.predicted_numerator_kg =
          parse_double(row[table.column("pred_numerator_kg")], origin, line);
      e.predicted_denominator_kg =
          parse_double(row[table.column("pred_denominator_kg")], origin, line);
    } else {
      e.predicted_numerator_kg = nan;
      e.predicted_denominator_kg = nan;
    }
    // Prior beliefs are not serialized; evaluation works off the posterior.
    e.prior_mean = e.posterior_mean;
    e.prior_cov_diag = e.posterior_cov_diag;
    trace.entries.push_back(std::move(e));
  }
  return trace;
}

void save_baseline_estimates(const std::filesystem::path& path,
                             const std::vector<baseline::WindowEstimate>& estimates,
                             const ScrapCatalog& catalog) {
  auto os = open_out(path);
  std::vector<std::string> header = {"heat_index", "predicted_f_steel_ppm"};
  for (const auto& id : catalog.scrap_ids) header.push_back("alpha_" + id + "_ppm");
  header.push_back("unidentifiable_ids");
  write_csv_row(os, header);
  std::vector<std::string> row;
  for (const auto& est : estimates) {
    row.clear();
    row.push_back(std::to_string(est.heat_index));
    row.push_back(format_double(to_ppm(est.predicted_f_steel)));
    for (int i = 0; i < est.alpha.size(); ++i) row.push_back(format_double(to_ppm(est.alpha[i])));
    std::string flagged;
    for (std::size_t i = 0; i < est.unidentifiable.size(); ++i) {
      if (est.unidentifiable[i]) {
        if (!flagged.empty()) flagged += ';';
        flagged += catalog.scrap_ids[i];
      }
    }
    row.push_back(flagged);
    write_csv_row(os, row);
  }
}

std::vector<baseline::WindowEstimate> load_baseline_estimates(
    const std::filesystem::path& path, const ScrapCatalog& catalog) {
  const CsvTable table = read_csv_file(path);
  const std::string origin = path.string();
  const int n = catalog.size();
  std::vector<int> alpha_cols;
  for (const auto& id : catalog.scrap_ids) {
    const int col = table.column("alpha_" + id + "_ppm");
    if (col < 0) throw ParseError(origin + ": missing column alpha_" + id + "_ppm");
    alpha_cols.push_back(col);
  }
  const int c_index = table.column("heat_index");
  const int c_pred = table.column("predicted_f_steel_ppm");
  const int c_flags = table.column("unidentifiable_ids");
  if (c_index < 0 || c_pred < 0) throw ParseError(origin + ": missing baseline columns");

  std::vector<baseline::WindowEstimate> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const long line = static_cast<long>(r) + 2;
    const auto& row = table.rows[r];
    baseline::WindowEstimate est;
    est.heat_index = static_cast<int>(parse_long(row[c_index], origin, line));
    est.predicted_f_steel = from_ppm(parse_double(row[c_pred], origin, line));
    est.alpha.resize(n);
    est.unidentifiable.assign(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i)
      est.alpha[i] = from_ppm(parse_double(row[alpha_cols[i]], origin, line));
    if (c_flags >= 0 && !row[c_flags].empty()) {
      std::stringstream ss(row[c_flags]);
      std::string id;
      while (std::getline(ss, id, ';')) {
        for (int i = 0; i < n; ++i)
          if (catalog.scrap_ids[static_cast<std::size_t>(i)] == id)
            est.unidentifiable[static_cast<std::size_t>(i)] = 1;
      }
    }
    out.push_back(std::move(est));
  }
  return out;
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

void write_manifest(const std::filesystem::path& dir, const std::string& command,
                    const std::string& config_dump, std::uint64_t seed,
                    const std::vector<std::string>& outputs) {
  json j;
  j["command"] = command;
  j["version"] = std::string(kVersion);
  j["seed"] = seed;
  std::ostringstream hash;
  hash << std::hex << fnv1a64(config_dump);
  j["config_hash"] = hash.str();
  j["outputs"] = outputs;
  auto os = open_out(dir / ("manifest_" + command + ".json"));
  os << j.dump(2) << '\n';
}

}  // namespace scrapest::io
