#include "scrapest/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "scrapest/moments.hpp"
#include "scrapest/rng.hpp"

namespace scrapest::synth {

Eigen::VectorXd sample_beta_vector(const Eigen::VectorXd& q, const Eigen::VectorXd& Q_diag,
                                   std::mt19937_64& rng) {
  if (q.size() != Q_diag.size()) throw DomainError("sample_beta_vector: dimension mismatch");
  Eigen::VectorXd out(q.size());
  for (int i = 0; i < q.size(); ++i) {
    if (Q_diag[i] == 0.0) {
      out[i] = q[i];  // degenerate component
      continue;
    }
    const BetaParams p = beta_params_from_moments(q[i], Q_diag[i], i);
    std::gamma_distribution<double> gu(p.u, 1.0);
    std::gamma_distribution<double> gv(p.v, 1.0);
    const double x = gu(rng);
    const double y = gv(rng);
    out[i] = (x + y > 0.0) ? x / (x + y) : q[i];
  }
  return out;
}

std::vector<Eigen::VectorXd> generate_state_trajectory(const Eigen::VectorXd& alpha1,
                                                       double gamma, const Eigen::VectorXd& q,
                                                       const Eigen::VectorXd& Q_diag,
                                                       int n_heats, std::mt19937_64& rng) {
  if (n_heats < 1) throw DomainError("trajectory length must be >= 1");
  if ((alpha1.array() < 0.0).any() || (alpha1.array() > 1.0).any())
    throw DomainError("alpha1 must lie in [0, 1]^N");
  std::vector<Eigen::VectorXd> traj;
  traj.reserve(static_cast<std::size_t>(n_heats));
  traj.push_back(alpha1);
  for (int t = 1; t < n_heats; ++t) {
    if (gamma == 0.0) {
      traj.push_back(traj.back());
      continue;
    }
    const Eigen::VectorXd eta = sample_beta_vector(q, Q_diag, rng);
    traj.push_back((1.0 - gamma) * traj.back() + gamma * eta);
  }
  return traj;
}

std::vector<Eigen::Vector2d> generate_partition_trajectory(const Eigen::Vector2d& c1,
                                                           double gamma,
                                                           const Eigen::Vector2d& q_c,
                                                           const Eigen::Vector2d& Qc_diag,
                                                           int n_heats, std::mt19937_64& rng) {
  if (n_heats < 1) throw DomainError("trajectory length must be >= 1");
  if ((Qc_diag.array() < 0.0).any()) throw DomainError("Q_c diagonal must be >= 0");
  std::vector<Eigen::Vector2d> traj;
  traj.reserve(static_cast<std::size_t>(n_heats));
  traj.push_back(c1);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const Eigen::Vector2d sd = Qc_diag.cwiseSqrt();
  for (int t = 1; t < n_heats; ++t) {
    Eigen::Vector2d theta = q_c;
    for (int i = 0; i < 2; ++i)
      if (sd[i] > 0.0) theta[i] += sd[i] * gauss(rng);
    traj.push_back((1.0 - gamma) * traj.back() + gamma * theta);
  }
  return traj;
}

std::vector<double> synthesize_linear(const std::vector<Eigen::VectorXd>& truth_alpha,
                                      std::vector<HeatRecord>& heats, double H,
                                      std::mt19937_64& rng) {
  if (truth_alpha.size() != heats.size())
    throw DomainError("truth and heats must have equal length");
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double noise_sd = std::sqrt(H);
  std::vector<double> y(heats.size());
  for (std::size_t t = 0; t < heats.size(); ++t) {
    HeatRecord& h = heats[t];
    if (!(h.m_steel_kg > 0.0)) {
      std::ostringstream os;
      os << "heat " << h.heat_index << ": m_steel must be positive to form an observation";
      throw GenerationError(os.str());
    }
    const double scrap_mass = h.scrap_mass_kg.dot(truth_alpha[t]);
    const double eps = noise_sd > 0.0 ? noise_sd * gauss(rng) : 0.0;
    y[t] = scrap_mass + eps;
    h.f_steel = (scrap_mass + h.m_hm_kg * h.f_hm + eps) / h.m_steel_kg;
  }
  return y;
}

std::vector<double> synthesize_nonlinear(const std::vector<Eigen::VectorXd>& truth_alpha,
                                         const std::vector<Eigen::Vector2d>& truth_c,
                                         std::vector<HeatRecord>& heats, double H,
                                         std::mt19937_64& rng) {
  if (truth_alpha.size() != heats.size() || truth_c.size() != heats.size())
    throw DomainError("truth and heats must have equal length");
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double noise_sd = std::sqrt(H);
  std::vector<double> y(heats.size());
  for (std::size_t t = 0; t < heats.size(); ++t) {
    HeatRecord& h = heats[t];
    if (!(h.m_steel_kg > 0.0)) {
      std::ostringstream os;
      os << "heat " << h.heat_index << ": m_steel must be positive to form an observation";
      throw GenerationError(os.str());
    }
    if (!h.f_feon_slag) {
      std::ostringstream os;
      os << "heat " << h.heat_index << ": f_feon_slag required for a slag-partitioning element";
      throw GenerationError(os.str());
    }
    const double ell = truth_c[t][0] + truth_c[t][1] * *h.f_feon_slag;
    const double denom = 1.0 + ell * h.m_slag_kg / h.m_steel_kg;
    if (!(denom > 0.0)) {
      std::ostringstream os;
      os << "heat " << h.heat_index << ": observation denominator " << denom
         << " <= 0 (partition coefficient " << ell << ")";
      throw GenerationError(os.str());
    }
    const double steel_mass = (h.scrap_mass_kg.dot(truth_alpha[t]) + h.m_hm_kg * h.f_hm) / denom;
    const double eps = noise_sd > 0.0 ? noise_sd * gauss(rng) : 0.0;
    y[t] = steel_mass + eps;
    h.f_steel = y[t] / h.m_steel_kg;
  }
  return y;
}

namespace {

struct ActivityWindow {
  int begin = 0;
  int end = 0;  // half-open
};

double lognormal(std::mt19937_64& rng, std::normal_distribution<double>& gauss, double median,
                 double log_sd) {
  return median * std::exp(log_sd * gauss(rng));
}

}  // namespace

std::vector<HeatRecord> surrogate_heats(const SurrogateConfig& cfg, int n_scrap,
                                        std::mt19937_64& rng) {
  if (n_scrap < 1 || cfg.n_heats < 1) throw DomainError("surrogate: need n_scrap, n_heats >= 1");
  const int T = cfg.n_heats;
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  // Per-type usage pattern: a few activity intervals, an inclusion
  // probability while active, and a log-normal mass scale.
  std::vector<std::vector<ActivityWindow>> windows(n_scrap);
  std::vector<double> include_prob(n_scrap), mass_median(n_scrap), mass_log_sd(n_scrap);
  for (int s = 0; s < n_scrap; ++s) {
    include_prob[s] = 0.2 + 0.4 * unif(rng);
    mass_median[s] = lognormal(rng, gauss, cfg.scrap_mass_median_kg, 0.35);
    mass_log_sd[s] = cfg.scrap_mass_log_sd;
    const int n_windows = 1 + static_cast<int>(unif(rng) * 3.0);  // 1..3
    for (int w = 0; w < n_windows; ++w) {
      const int len = static_cast<int>((0.15 + 0.35 * unif(rng)) * T);
      const int begin = static_cast<int>(unif(rng) * std::max(1, T - len));
      windows[s].push_back({begin, std::min(T, begin + len)});
    }
    if (s == 35 && n_scrap >= 36) {
      // Type "36" goes quiet in the second half of the horizon.
      windows[s] = {{0, T / 2}};
      include_prob[s] = 0.45;
    }
  }

  auto active = [&](int s, int t) {
    for (const auto& w : windows[s])
      if (t >= w.begin && t < w.end) return true;
    return false;
  };

  std::vector<HeatRecord> heats(static_cast<std::size_t>(T));
  for (int t = 0; t < T; ++t) {
    HeatRecord& h = heats[static_cast<std::size_t>(t)];
    h.heat_index = t + 1;
    h.scrap_mass_kg = Eigen::VectorXd::Zero(n_scrap);
    int n_used = 0;
    for (int s = 0; s < n_scrap; ++s) {
      if (active(s, t) && unif(rng) < include_prob[s]) {
        h.scrap_mass_kg[s] = lognormal(rng, gauss, mass_median[s], mass_log_sd[s]);
        ++n_used;
      }
    }
    if (n_used == 0) {
      // Every heat charges at least one scrap type.
      const int s = static_cast<int>(unif(rng) * n_scrap) % n_scrap;
      h.scrap_mass_kg[s] = lognormal(rng, gauss, mass_median[s], mass_log_sd[s]);
    }
    h.m_hm_kg = lognormal(rng, gauss, cfg.hot_metal_median_kg, cfg.hot_metal_log_sd);
    h.f_hm = std::min(1.0, lognormal(rng, gauss, cfg.f_hm_median, cfg.f_hm_log_sd));
    h.m_steel_kg = cfg.steel_yield * (h.m_hm_kg + h.scrap_mass_kg.sum());
    h.m_slag_kg = lognormal(rng, gauss, cfg.slag_median_kg, cfg.slag_log_sd);
    h.f_feon_slag = std::clamp(cfg.f_feon_mean + cfg.f_feon_sd * gauss(rng), 0.05, 0.60);
  }
  return heats;
}

Eigen::VectorXd default_mean_fractions(const std::string& element_id, int n_scrap) {
  if (n_scrap < 1) throw DomainError("n_scrap must be >= 1");
  // Published anchor values (ppm) for types 01, 02 and 45.
  double first = 500.0, second = 900.0, last = 1500.0;
  double lo = 150.0, hi = 2500.0;
  if (element_id == "Cu") {
    first = 208.80; second = 900.00; last = 3060.99; lo = 150.0; hi = 2800.0;
  } else if (element_id == "Ni") {
    first = 227.70; second = 227.70; last = 1147.95; lo = 120.0; hi = 1100.0;
  } else if (element_id == "Cr") {
    first = 180.00; second = 900.00; last = 1601.64; lo = 120.0; hi = 1500.0;
  } else if (element_id == "S") {
    first = 99.00; second = 351.00; last = 342.00; lo = 80.0; hi = 400.0;
  }
  Eigen::VectorXd q_ppm(n_scrap);
  std::mt19937_64 fixed(0x5c7a9e57u);  // independent of the dataset seed
  std::uniform_real_distribution<double> unif(std::log(lo), std::log(hi));
  for (int i = 0; i < n_scrap; ++i) q_ppm[i] = std::exp(unif(fixed));
  q_ppm[0] = first;
  if (n_scrap >= 2) q_ppm[1] = second;
  if (n_scrap >= 45) q_ppm[44] = last;
  return q_ppm * kPpm;
}

SyntheticDataset generate(const GeneratorInputs& in) {
  in.catalog.validate();
  in.noise.validate();
  in.noise.validate_beta_feasible();
  if (in.noise.state_dim() != in.catalog.size())
    throw DomainError("NoiseSpec dimension does not match catalog");
  if (in.heats.empty()) throw DomainError("no heats supplied");
  if (in.element.transfers_to_slag && !in.noise.has_partition())
    throw DomainError("slag-partitioning element needs q_c and Q_c");
  for (const auto& h : in.heats) h.validate(in.catalog.size());

  SyntheticDataset ds;
  ds.catalog = in.catalog;
  ds.element = in.element;
  ds.heats = in.heats;
  ds.seed = in.seed;
  ds.noise = in.noise;

  const int T = static_cast<int>(in.heats.size());
  auto state_rng = make_engine(in.seed, RngStream::kState);
  ds.truth_alpha = generate_state_trajectory(in.noise.q, in.noise.gamma, in.noise.q,
                                             in.noise.Q_diag, T, state_rng);
  auto obs_rng = make_engine(in.seed, RngStream::kObservation);
  if (in.element.transfers_to_slag) {
    auto part_rng = make_engine(in.seed, RngStream::kPartition);
    ds.truth_c = generate_partition_trajectory(*in.noise.q_c, in.noise.gamma, *in.noise.q_c,
                                               *in.noise.Qc_diag, T, part_rng);
    synthesize_nonlinear(ds.truth_alpha, ds.truth_c, ds.heats, in.noise.H, obs_rng);
  } else {
    synthesize_linear(ds.truth_alpha, ds.heats, in.noise.H, obs_rng);
  }
  return ds;
}

}  // namespace scrapest::synth
